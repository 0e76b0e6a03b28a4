from functools import singledispatch
import os

from frozendict import frozendict
import numpy as np

SEED_MASK = (1 << 64) - 1


@singledispatch
def freeze(obj):
    """
    Return an immutable version of `obj`.

    Hashable objects are returned as is. Register your own freeze method
    for other types with `freeze.register`.

    """
    if obj is None or isinstance(obj, (str, bytes, int, float, tuple)):
        return obj
    else:
        raise TypeError(
            ("type(%r) => %s cannot be frozen, "
             "see `ctda.utils.freeze` docs to register your "
             "own freeze method") % (obj, type(obj)))


@freeze.register(dict)
@freeze.register(frozendict)
def freeze_dict(obj):
    return frozendict((k, freeze(v)) for k, v in obj.items())


@freeze.register(list)
def freeze_list(obj):
    return tuple(freeze(v) for v in obj)


@freeze.register(np.ndarray)
def freeze_array(obj):
    """Read-only copy of an array."""
    frozen = np.array(obj, copy=True)
    frozen.setflags(write=False)
    return frozen


@singledispatch
def unfreeze(obj):
    """Return a plain, JSON serializable version of `obj`."""
    return obj


@unfreeze.register(dict)
@unfreeze.register(frozendict)
def unfreeze_dict(obj):
    return {k: unfreeze(v) for k, v in obj.items()}


@unfreeze.register(list)
@unfreeze.register(tuple)
def unfreeze_sequence(obj):
    return [unfreeze(x) for x in obj]


@unfreeze.register(np.ndarray)
def unfreeze_array(obj):
    return [unfreeze(x) for x in obj.tolist()]


@unfreeze.register(np.generic)
def unfreeze_scalar(obj):
    return obj.item()


def derive_seed(seed, index):
    """Seed of the `index`-th subtask of a run seeded with `seed`."""
    return (int(seed) ^ int(index)) & SEED_MASK


def thread_count():
    """
    Worker threads allowed by the `CTDA_THREADS` environment variable.

    Zero, unset or empty means one per CPU.

    """
    raw = os.environ.get('CTDA_THREADS', '').strip() or '0'
    try:
        requested = int(raw)
    except ValueError:
        raise ValueError("CTDA_THREADS must be an integer, got %r" % raw)
    if requested < 0:
        raise ValueError("CTDA_THREADS must be >= 0, got %d" % requested)
    return requested or (os.cpu_count() or 1)
