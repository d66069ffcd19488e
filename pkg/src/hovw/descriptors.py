"""Shape descriptors: 25 Zernike magnitudes plus four contour measures.

Every measure is computed so that 90 degree rotations and translations of the
pixel grid reproduce the same floating point values: moments come from
integer centred coordinates and order-independent fixed-point sums, contours
start at a rotation-independent point, and only sign-symmetric arithmetic
touches rotated coordinates.
"""

import math

import numpy as np

from .errors import InvalidInputError, InvalidParameterError

ZERNIKE_ORDERS = tuple((p, q) for p in range(9) for q in range(p % 2, p + 1, 2))
FEATURE_NAMES = tuple(f"Z{p}{q}" for p, q in ZERNIKE_ORDERS) + (
    "circularity", "bending_energy", "eccentricity", "convexity")
N_FEATURES = len(FEATURE_NAMES)

# shape radius of gyration maps to this radius of the unit disk
GYRATION_RADIUS = 0.5
# contours are resampled to this many arc-length points before measuring
CONTOUR_SAMPLES = 128
# Gaussian widths in resampled points: staircase removal for lengths, and the
# stronger smoothing curvature needs. Both scale with the contour.
PERIMETER_SIGMA = 1.5
BENDING_SIGMA = 4.0
_FIXED_POINT = 2.0 ** 40

_SQRT2 = math.sqrt(2.0)


def radial_polynomial(p, q, rho):
    """Zernike radial polynomial R_pq(rho) (standard form, q >= 0, p - q even)."""
    if p < 0 or q < 0 or q > p or (p - q) % 2:
        raise InvalidParameterError(f"invalid Zernike indices p={p}, q={q}")
    rho = np.asarray(rho, dtype=np.float64)
    out = np.zeros_like(rho)
    for s in range((p - q) // 2 + 1):
        coef = (-1) ** s * math.factorial(p - s) / (
            math.factorial(s) * math.factorial((p + q) // 2 - s) * math.factorial((p - q) // 2 - s))
        out = out + coef * rho ** (p - 2 * s)
    return out if out.ndim else float(out)


def _fixed_sum(values):
    # exact integer accumulation: independent of pixel order, odd-symmetric
    return float(np.rint(values * _FIXED_POINT).astype(np.int64).sum()) / _FIXED_POINT


def _centred_pixels(mask):
    ys, xs = np.nonzero(mask)
    n = len(xs)
    if n == 0:
        raise InvalidInputError("zero-area shape")
    xs = xs.astype(np.int64)
    ys = ys.astype(np.int64)
    sx, sy = int(xs.sum()), int(ys.sum())
    # sum of squared n-scaled offsets, n * (n * sum(x^2) - sum(x)^2), in Python ints
    g = n * (n * int((xs * xs).sum()) - sx * sx) + n * (n * int((ys * ys).sum()) - sy * sy)
    # n * (coordinate - centroid), exact in integers
    return n * xs - sx, n * ys - sy, n, g


def zernike_moments(mask):
    """Magnitudes |Z_pq| for p <= 8 over a region mask, in ``ZERNIKE_ORDERS`` order.

    The region is centred on its centroid and scaled so its radius of gyration
    becomes ``GYRATION_RADIUS``; pixels landing outside the unit disk are dropped.
    """
    X, Y, n, g = _centred_pixels(np.asarray(mask, dtype=bool))
    # float squares: symmetric in X and Y, so 90 degree rotations give equal values
    Xf = X.astype(np.float64)
    Yf = Y.astype(np.float64)
    r2 = Xf * Xf + Yf * Yf
    out = np.zeros(len(ZERNIKE_ORDERS))
    if g == 0:
        # single pixel: only the constant moment survives
        out[0] = 1.0 / math.pi * (n / GYRATION_RADIUS ** 2)
        return out
    c2 = GYRATION_RADIUS ** 2
    # X, Y are n-scaled offsets, so rho^2 = c2 * r2 * n / g
    rho = np.sqrt(r2 * (c2 * n / g))
    inside = rho <= 1.0
    rho = rho[inside]
    X = Xf[inside]
    Y = Yf[inside]
    r = np.sqrt(r2[inside])
    safe = np.where(r > 0, r, 1.0)
    ur = np.where(r > 0, X / safe, 1.0)
    ui = np.where(r > 0, Y / safe, 0.0)
    # powers of the unit phasor, one rounding per elementwise op
    pr = [np.ones_like(ur)]
    pi_ = [np.zeros_like(ur)]
    for _ in range(8):
        a, b = pr[-1], pi_[-1]
        re = a * ur
        re -= b * ui
        im = a * ui
        im += b * ur
        pr.append(re)
        pi_.append(im)
    # pixel area in normalised units
    d_area = c2 * n / g * n * n
    rho_pow = [np.ones_like(rho)]
    for _ in range(8):
        rho_pow.append(rho_pow[-1] * rho)
    for idx, (p, q) in enumerate(ZERNIKE_ORDERS):
        rad = np.zeros_like(rho)
        for s in range((p - q) // 2 + 1):
            coef = (-1) ** s * math.factorial(p - s) / (
                math.factorial(s) * math.factorial((p + q) // 2 - s)
                * math.factorial((p - q) // 2 - s))
            rad = rad + coef * rho_pow[p - 2 * s]
        re = _fixed_sum(rad * pr[q])
        im = _fixed_sum(rad * pi_[q]) if q else 0.0
        out[idx] = (p + 1) / math.pi * d_area * math.sqrt(re * re + im * im)
    return out


# ---------------------------------------------------------------- contours

_CHAIN = {(1, 0): 0, (1, 1): 1, (0, 1): 2, (-1, 1): 3, (-1, 0): 4, (-1, -1): 5, (0, -1): 6, (1, -1): 7}


def _steps(contour):
    c = np.asarray(contour, dtype=np.int64)
    return np.roll(c, -1, axis=0) - c


def _least_rotation(seq):
    """Start index of the lexicographically least rotation (Booth's algorithm)."""
    s = list(seq) * 2
    n = len(seq)
    f = [-1] * len(s)
    k = 0
    for j in range(1, len(s)):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k % n


def canonical_contour(contour):
    """Rotate the cyclic point list to a start that 90 degree grid rotations preserve.

    The start is the least rotation of the turn sequence (chain-code
    differences), which is unchanged by quarter turns and translations.
    """
    c = np.asarray(contour, dtype=np.int64)
    if len(c) < 2:
        return c
    st = _steps(c)
    codes = [_CHAIN[(int(dx), int(dy))] for dx, dy in st]
    turns = [(codes[i] - codes[i - 1]) % 8 for i in range(len(codes))]
    return np.roll(c, -_least_rotation(turns), axis=0)


def _gaussian_smooth_closed(points, sigma):
    """Circular Gaussian smoothing of a closed (n, 2) float polyline."""
    n = len(points)
    if sigma <= 0 or n < 3:
        return points.copy()
    r = min(int(math.ceil(3 * sigma)), (n - 1) // 2)
    w = np.exp(-0.5 * (np.arange(-r, r + 1) / sigma) ** 2)
    w /= w.sum()
    out = np.zeros_like(points)
    for k, wk in zip(range(-r, r + 1), w):
        out += wk * np.roll(points, -k, axis=0)
    return out


def _closed_length(points):
    d = np.roll(points, -1, axis=0) - points
    return math.fsum(np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1]))


def chain_length(contour):
    """Contour length with axial steps 1 and diagonal steps sqrt(2)."""
    st = _steps(contour)
    diag = int((np.abs(st).sum(axis=1) == 2).sum())
    return (len(st) - diag) + diag * _SQRT2


def _resample_closed(points, n):
    """``n`` points evenly spaced by arc length along a closed polyline."""
    seg = np.roll(points, -1, axis=0) - points
    seglen = np.sqrt(seg[:, 0] * seg[:, 0] + seg[:, 1] * seg[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(seglen)])
    total = cum[-1]
    t = np.arange(n) * (total / n)
    idx = np.searchsorted(cum, t, side="right") - 1
    idx = np.clip(idx, 0, len(points) - 1)
    frac = (t - cum[idx]) / np.where(seglen[idx] > 0, seglen[idx], 1.0)
    return points[idx] + frac[:, None] * seg[idx]


def smoothed_contour(contour, sigma=PERIMETER_SIGMA, samples=CONTOUR_SAMPLES):
    """Canonically started contour, resampled by arc length and Gaussian smoothed.

    Coordinates are relative to the start point. Because the smoothing width
    is counted in samples, a scaled contour yields a scaled curve.
    """
    c = canonical_contour(contour)
    if len(np.unique(c, axis=0)) < 2:
        raise InvalidInputError("degenerate single-pixel contour")
    rel = (c - c[0]).astype(np.float64)
    return _gaussian_smooth_closed(_resample_closed(rel, samples), sigma)


def perimeter(contour, sigma=PERIMETER_SIGMA):
    """Perimeter of the pixel region bounded by ``contour``.

    Length of the smoothed pixel-centre contour plus pi, the growth of a
    closed convex curve's length when offset outward by half a pixel, so the
    measure refers to the same region as the pixel-count area.
    """
    c = np.asarray(contour)
    if len(np.unique(c, axis=0)) < 2:
        return math.pi
    return _closed_length(smoothed_contour(c, sigma)) + math.pi


def circularity(contour, area, sigma=PERIMETER_SIGMA):
    """perimeter^2 / (4 pi area)."""
    if area <= 0:
        raise InvalidInputError("zero-area shape")
    return perimeter(contour, sigma) ** 2 / (4.0 * math.pi * area)


def bending_energy(contour, samples=CONTOUR_SAMPLES, sigma=BENDING_SIGMA):
    """Mean squared curvature of the contour rescaled to unit perimeter.

    Curvature is the turning of the central-difference tangent between
    neighbouring samples, divided by the arc length it spans.
    """
    curve = smoothed_contour(contour, sigma, samples)
    total = _closed_length(curve)
    if total <= 0:
        raise InvalidInputError("degenerate contour")
    u = curve / total
    tangent = np.roll(u, -1, axis=0) - np.roll(u, 1, axis=0)
    ahead = np.roll(tangent, -1, axis=0)
    behind = np.roll(tangent, 1, axis=0)
    cross = behind[:, 0] * ahead[:, 1] - behind[:, 1] * ahead[:, 0]
    dot = behind[:, 0] * ahead[:, 0] + behind[:, 1] * ahead[:, 1]
    curvature = np.arctan2(cross, dot) / (2.0 / samples)
    return math.fsum(curvature * curvature) / samples


def eccentricity(contour):
    """lambda_2 / lambda_1 of the contour points' covariance matrix."""
    c = np.asarray(contour, dtype=np.int64)
    n = len(c)
    if n < 2:
        return 1.0
    x = c[:, 0]
    y = c[:, 1]
    sx, sy = int(x.sum()), int(y.sum())
    # n^2 * covariance entries, exact integers
    sxx = n * int((x * x).sum()) - sx * sx
    syy = n * int((y * y).sum()) - sy * sy
    sxy = n * int((x * y).sum()) - sx * sy
    tr = float(sxx + syy)
    if tr == 0:
        return 1.0
    disc = math.sqrt(float((sxx - syy) ** 2 + 4 * sxy * sxy))
    lam1 = (tr + disc) / 2.0
    lam2 = (tr - disc) / 2.0
    return max(lam2, 0.0) / lam1


def convex_hull(points):
    """Monotone-chain convex hull, counterclockwise, without collinear points."""
    pts = sorted(set(map(tuple, np.asarray(points).tolist())))
    if len(pts) <= 2:
        return np.array(pts, dtype=np.asarray(points).dtype).reshape(-1, 2)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def convexity(contour, sigma=PERIMETER_SIGMA):
    """Hull perimeter over perimeter, both on the smoothed contour (so <= 1)."""
    c = np.asarray(contour)
    if len(np.unique(c, axis=0)) < 2:
        return 1.0
    pts = smoothed_contour(c, sigma)
    hull = convex_hull(pts)
    hull_len = _closed_length(hull) if len(hull) > 1 else 0.0
    return (hull_len + math.pi) / (_closed_length(pts) + math.pi)


def describe_shape(shape):
    """29-vector [Zernike(25), circularity, bending energy, eccentricity, convexity].

    Accepts a :class:`~hovw.decompose.ComponentShape`; measures use its filled
    region and outer contour. Single-pixel shapes get zero bending energy.
    """
    contour = shape.contour
    vec = np.empty(N_FEATURES)
    vec[:25] = zernike_moments(shape.filled)
    vec[25] = circularity(contour, shape.filled_area)
    single = len(np.unique(np.asarray(contour), axis=0)) < 2
    vec[26] = 0.0 if single else bending_energy(contour)
    vec[27] = eccentricity(contour)
    vec[28] = convexity(contour)
    return vec
