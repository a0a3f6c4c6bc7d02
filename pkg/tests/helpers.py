import math

from hypothesis import strategies as st

from rankdecay.core import AnchorList


@st.composite
def distributions(draw, min_size=1, max_size=8, floor=1e-3):
    """Probability vectors with every entry bounded away from zero."""
    weights = draw(st.lists(st.floats(floor, 1.0), min_size=min_size, max_size=max_size))
    total = math.fsum(weights)
    return [w / total for w in weights]


@st.composite
def anchor_lists(draw, min_size=1, max_size=8):
    probs = draw(distributions(min_size, max_size))
    return AnchorList("A", tuple(f"B{i}" for i in range(len(probs))), tuple(probs))


def mixture_entropy(probs, index, a):
    """Entropy of the mixture keeping mass a * p_j off ``index``; written out longhand."""
    q = sum(p for j, p in enumerate(probs) if j != index)
    masses = [a * p for j, p in enumerate(probs) if j != index] + [1.0 - a * q]
    return -sum(m * math.log(m) for m in masses if m > 0)


def golden_section_max(f, lo, hi, tol=1e-10):
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (a + b) / 2
