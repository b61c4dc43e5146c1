"""Counter-based RNG primitives (scalar reference implementation).

Every random quantity in the package is addressed, not streamed: a draw is a
pure function of a 64-bit address built from (master_seed, stream_index) and
the position of the draw (replication index, node path, tag).  This is what
makes simulation results independent of execution order, thread count and
backend.

Addressing scheme, shared with both compute backends:

  base_key = stream_key(master_seed, stream_index)
  rep_key  = mix2(base_key, replication_index)     # one tree per replication
  per node with address a:
      mix2(a, 0) -> uniform for the child-count draw
      mix2(a, 1) -> uniform for the initial-infection coin
      mix2(a, j + 2) -> address of child j (0-based)
  the root's address is rep_key (or stream_key for sample_tree).

The mixer is the splitmix64 finalizer; tag separation uses an odd affine map
so that for a fixed tag the address map stays a bijection of the 64-bit
state space.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB
TAG_SALT = 0x632BE59BD9B4E019

TAG_COUNT = 0
TAG_COIN = 1
TAG_CHILD0 = 2

U01_SCALE = 2.0 ** -53


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * MIX_B) & MASK64
    return (z ^ (z >> 31)) & MASK64


def mix2(a: int, t: int) -> int:
    return mix64((a ^ ((t * GOLDEN + TAG_SALT) & MASK64)) & MASK64)


def stream_key(master_seed: int, stream_index: int) -> int:
    return mix2(mix64((master_seed + GOLDEN) & MASK64), stream_index & MASK64)


def u01(h: int) -> float:
    return (h >> 11) * U01_SCALE
