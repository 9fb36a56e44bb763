"""WKB trajectory tracing, network growth, and finite-web detection.

A trajectory with ordered sheet pair (x_i, x_j) solves

    (x_i(t) - x_j(t)) dz/dt = exp(i*theta),

integrated here in arclength form dz/ds = exp(i*theta) * conj(u)/|u| with
u = x_i - x_j re-tracked at every evaluation.  Networks start from the 8
critical trajectories emanating from each simple zero of P0, then grow by
the junction birth rule: at every crossing whose labels chain as
(i,j),(j,k) a new trajectory labeled (i,k) is seeded at the crossing.

Finite webs (a trajectory running into a zero, or a junction child doing
so) are located by bisecting the signed miss distance in theta; their
charge is read off by matching the chain integral of x dz against integer
combinations of the basis periods.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .curve import Charge, OMEGA, PeriodMap, cube_roots
from .errors import (
    ChargeIdentificationFailed,
    GenerationCapExceeded,
    NumericalError,
    PatternViolation,
    SheetAmbiguity,
    UnsupportedWebTopology,
    ValidationError,
)

TWO_PI = 2 * math.pi


def _wrap(a):
    """Wrap an angle difference into (-pi, pi]."""
    return (a + math.pi) % TWO_PI - math.pi


# ----------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------

@dataclass
class TraceConfig:
    """Numerical knobs for tracing and network growth."""

    escape_radius: float = None      # default: 4 * max |ramification| + 10
    delta0: float = 1e-4             # seed offset from a zero
    delta_hit: float = 1e-3          # "ran into a zero" radius
    rk_tol: float = 1e-9             # local error target per unit arclength
    h_max: float = 0.5
    h_min: float = 1e-12
    max_arclength: float = 400.0
    max_points: int = 200000
    dedup_radius: float = 1e-4       # junction / origin exclusion radius
    generation_cap: int = 10
    outward_steps: int = 20          # consecutive outward steps past the radius

    def resolved_escape_radius(self, curve):
        if self.escape_radius is not None:
            return self.escape_radius
        zs = curve.ramification_points
        return 4.0 * max((abs(z) for z in zs), default=0.0) + 10.0


def _nearest_root(curve, z, x_ref):
    rts = cube_roots(-curve.polynomial(z))
    return min(rts, key=lambda r: abs(r - x_ref))


# ----------------------------------------------------------------------
# critical seeds
# ----------------------------------------------------------------------

@dataclass
class TrajectorySeed:
    z: complex
    pair: tuple                   # (x_i, x_j) at z
    origin: tuple                 # ("critical", zero_idx, ray_id, phi)
                                  # or ("junction", parent_key_a, parent_key_b)
    theta: float


def _ray_W(curve, z0, theta, delta0, phi, x_ref, p, q):
    z = z0 + delta0 * cmath.exp(1j * phi)
    x = _nearest_root(curve, z, x_ref)
    triple = (x, x * OMEGA, x * OMEGA * OMEGA)
    W = cmath.exp(-1j * theta) * (triple[p] - triple[q]) * cmath.exp(1j * phi)
    return W, x, triple


def _bisect_ray(curve, z0, theta, delta0, phi_a, phi_b, x_ref, p, q):
    Wa, xa, _ = _ray_W(curve, z0, theta, delta0, phi_a, x_ref, p, q)
    Wb, _, _ = _ray_W(curve, z0, theta, delta0, phi_b, xa, p, q)
    if (Wa.imag < 0) == (Wb.imag < 0):
        return None
    for _ in range(60):
        mid = 0.5 * (phi_a + phi_b)
        Wm, xm, _ = _ray_W(curve, z0, theta, delta0, mid, xa, p, q)
        if (Wm.imag < 0) == (Wa.imag < 0):
            phi_a, Wa, xa = mid, Wm, xm
        else:
            phi_b, Wb = mid, Wm
        if abs(phi_b - phi_a) < 1e-13:
            break
    phi = 0.5 * (phi_a + phi_b)
    Wm, _, triple = _ray_W(curve, z0, theta, delta0, phi, xa, p, q)
    if Wm.real <= 0:
        return None
    return (phi % TWO_PI, (triple[p], triple[q]))


def _rays_of_zero(curve, z0, theta, delta0):
    """Outgoing critical directions around one zero, by a full angular scan.

    A direction phi is critical for the ordered pair (p, q) when
    W = exp(-i*theta) * (x_p - x_q) * exp(i*phi) lands on the positive
    real axis: the trajectory through that point then moves radially
    outward.  Exactly 8 directions exist at a simple zero.
    """
    M = 1024
    x = cube_roots(-curve.polynomial(z0 + delta0))[0]
    samples = []
    eith = cmath.exp(-1j * theta)
    for k in range(M + 1):
        phi = TWO_PI * k / M
        z = z0 + delta0 * cmath.exp(1j * phi)
        x = _nearest_root(curve, z, x)
        triple = (x, x * OMEGA, x * OMEGA * OMEGA)
        Ws = [eith * (triple[p] - triple[q]) * cmath.exp(1j * phi)
              for p in range(3) for q in range(3) if p != q]
        samples.append((phi, x, Ws))
    pairs = [(p, q) for p in range(3) for q in range(3) if p != q]
    found = []
    for k in range(M):
        phi_a, xa, Wa = samples[k]
        phi_b, _, Wb = samples[k + 1]
        for m, (p, q) in enumerate(pairs):
            if (Wa[m].imag < 0) == (Wb[m].imag < 0):
                continue
            if Wa[m].real <= 0 and Wb[m].real <= 0:
                continue
            r = _bisect_ray(curve, z0, theta, delta0, phi_a, phi_b, xa, p, q)
            if r is not None:
                found.append(r)
    found.sort(key=lambda t: t[0])
    merged = []
    for phi, pair in found:
        if merged and abs(_wrap(phi - merged[-1][0])) < 1e-9:
            continue
        merged.append((phi, pair))
    while len(merged) > 1 and abs(_wrap(merged[0][0] - merged[-1][0])) < 1e-9:
        merged.pop()
    return merged


def _refine_ray(curve, z0, theta, delta0, phi0, width=0.06):
    """Re-find one critical direction near a warm-start angle."""
    z = z0 + delta0 * cmath.exp(1j * phi0)
    x_ref = cube_roots(-curve.polynomial(z))[0]
    best = None
    for p in range(3):
        for q in range(3):
            if p == q:
                continue
            r = _bisect_ray(curve, z0, theta, delta0,
                            phi0 - width, phi0 + width, x_ref, p, q)
            if r is None:
                continue
            d = abs(_wrap(r[0] - phi0))
            if best is None or d < best[0]:
                best = (d, r)
    return best[1] if best else None


class RayBook:
    """Persistent identities for the 8n critical rays across nearby phases.

    Ray directions rotate smoothly with theta; identities are carried by
    nearest-angle matching against the previous phase, so sweep bookkeeping
    survives index reshuffles at the 0/2pi seam.
    """

    def __init__(self, curve, delta0):
        self.curve = curve
        self.delta0 = delta0
        self.known = None      # {zero: [(ray_id, phi)]}
        self._next_id = 0

    def rays_at(self, theta, refresh=False):
        out = {}
        for zi, z0 in enumerate(self.curve.ramification_points):
            if self.known is None or refresh or zi not in self.known:
                rays = _rays_of_zero(self.curve, z0, theta, self.delta0)
            else:
                rays = []
                for rid, phi0 in self.known[zi]:
                    r = _refine_ray(self.curve, z0, theta, self.delta0, phi0)
                    if r is None:
                        rays = _rays_of_zero(self.curve, z0, theta, self.delta0)
                        break
                    rays.append(r)
                else:
                    unique = []
                    for phi, pair in sorted(rays, key=lambda t: t[0]):
                        if unique and abs(_wrap(phi - unique[-1][0])) < 1e-9:
                            continue
                        unique.append((phi, pair))
                    rays = unique
                    if len(rays) != 8:
                        rays = _rays_of_zero(self.curve, z0, theta, self.delta0)
            if len(rays) != 8:
                raise NumericalError(
                    f"found {len(rays)} critical directions at zero {zi}, "
                    f"expected 8")
            rays.sort(key=lambda t: t[0])
            out[zi] = rays
        # assign / carry identities
        book = {}
        for zi, rays in out.items():
            prev = self.known.get(zi) if self.known else None
            entries = []
            for phi, pair in rays:
                if prev:
                    rid = min(prev, key=lambda e: abs(_wrap(e[1] - phi)))[0]
                else:
                    rid = self._next_id
                    self._next_id += 1
                entries.append((rid, phi, pair))
            if len({e[0] for e in entries}) != len(entries):
                # ambiguous matching; hand out fresh ids
                entries = []
                for phi, pair in rays:
                    entries.append((self._next_id, phi, pair))
                    self._next_id += 1
            book[zi] = entries
        self.known = {zi: [(rid, phi) for rid, phi, _ in entries]
                      for zi, entries in book.items()}
        return book


def seed_critical(curve, theta, config=None):
    """All critical-trajectory seeds at one phase: 8 per zero of P0."""
    config = config or TraceConfig()
    seeds = []
    for zi, z0 in enumerate(curve.ramification_points):
        rays = _rays_of_zero(curve, z0, theta, config.delta0)
        if len(rays) != 8:
            raise NumericalError(
                f"found {len(rays)} critical directions at zero {zi}, expected 8")
        for ri, (phi, pair) in enumerate(rays):
            seeds.append(TrajectorySeed(
                z=z0 + config.delta0 * cmath.exp(1j * phi),
                pair=pair,
                origin=("critical", zi, ri, phi),
                theta=theta,
            ))
    return seeds


# ----------------------------------------------------------------------
# tracing
# ----------------------------------------------------------------------

# Cash-Karp embedded Runge-Kutta pair (orders 5 and 4)
_CK_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_CK_B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_CK_B4 = (2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4)


class Trajectory:
    """A traced WKB trajectory: polyline, tracked pair, chain integral.

    chain[k] is the accumulated integral of |x_i - x_j| over arclength up
    to point k; the complex integral of (x_i - x_j) dz along the curve is
    exp(i*theta) * chain[k], a consequence of the trajectory equation.
    """

    __slots__ = ("points", "pairs", "chain", "status", "hit_zero", "seed", "theta")

    def __init__(self, points, pairs, chain, status, hit_zero, seed, theta):
        self.points = points
        self.pairs = pairs
        self.chain = chain
        self.status = status          # "escaped" | "hit_zero" | "truncated"
        self.hit_zero = hit_zero
        self.seed = seed
        self.theta = theta

    def __len__(self):
        return len(self.points)

    @property
    def origin_kind(self):
        return self.seed.origin[0]

    def points_array(self):
        return np.asarray(self.points, dtype=complex)

    def chain_integral(self, upto=None):
        T = self.chain[-1 if upto is None else upto]
        return cmath.exp(1j * self.theta) * T


def _pair_rhs(curve, z, xi_ref, xj_ref, eith):
    rts = cube_roots(-curve.polynomial(z))
    xi = min(rts, key=lambda r: abs(r - xi_ref))
    xj = min(rts, key=lambda r: abs(r - xj_ref))
    u = xi - xj
    au = abs(u)
    if au == 0.0:
        raise SheetAmbiguity(f"tracked pair collided at z = {z}")
    return eith * u.conjugate() / au, au


def trace(curve, seed, config=None):
    """Integrate one trajectory until escape, a zero hit, or truncation."""
    config = config or TraceConfig()
    eith = cmath.exp(1j * seed.theta)
    esc = config.resolved_escape_radius(curve)
    zeros = curve.ramification_points

    z = complex(seed.z)
    rts = cube_roots(-curve.polynomial(z))
    xi = min(rts, key=lambda r: abs(r - seed.pair[0]))
    xj = min(rts, key=lambda r: abs(r - seed.pair[1]))
    if xi == xj:
        raise ValidationError("seed pair selects a single sheet")

    points = [z]
    pairs = [(xi, xj)]
    chain = [0.0]
    s_total = 0.0
    h = max(min(config.h_max,
                0.05 * min((abs(z - z0) for z0 in zeros), default=1.0)),
            64 * config.h_min)
    status, hit = "truncated", None
    outward = 0
    # the zero a trajectory starts from does not count as a hit until the
    # trajectory has genuinely left its neighborhood
    disarmed = {i for i, z0 in enumerate(zeros)
                if abs(z - z0) < 4 * config.delta_hit}
    arm_radius = 4 * config.delta_hit

    while True:
        dist = min((abs(z - z0) for z0 in zeros), default=float("inf"))
        h = min(h, config.h_max, 0.1 * dist + 0.5 * config.delta_hit)
        if h < config.h_min:
            raise SheetAmbiguity(f"step size collapsed at z = {z}")
        try:
            k = []
            g = []
            f0, a0 = _pair_rhs(curve, z, xi, xj, eith)
            k.append(f0)
            g.append(a0)
            for row in _CK_A[1:]:
                zz = z + h * sum(c * kk for c, kk in zip(row, k))
                f, a = _pair_rhs(curve, zz, xi, xj, eith)
                k.append(f)
                g.append(a)
        except SheetAmbiguity:
            h *= 0.25
            if h < config.h_min:
                raise
            continue
        z5 = z + h * sum(b * kk for b, kk in zip(_CK_B5, k))
        z4 = z + h * sum(b * kk for b, kk in zip(_CK_B4, k))
        T5 = h * sum(b * aa for b, aa in zip(_CK_B5, g))
        T4 = h * sum(b * aa for b, aa in zip(_CK_B4, g))
        err = abs(z5 - z4) + abs(T5 - T4)
        # absolute floor keeps tiny steps near zeros feasible at roundoff
        tol = config.rk_tol * h + 4e-15 * (1.0 + abs(z))
        if err > tol:
            h *= max(0.2, 0.9 * (tol / err) ** 0.25)
            continue
        # accept the step if the re-tracked pair keeps a safe margin
        rts = cube_roots(-curve.polynomial(z5))
        xi_n = min(rts, key=lambda r: abs(r - xi))
        xj_n = min(rts, key=lambda r: abs(r - xj))
        sep = min(abs(rts[0] - rts[1]), abs(rts[1] - rts[2]),
                  abs(rts[0] - rts[2]))
        if max(abs(xi_n - xi), abs(xj_n - xj)) > sep / 3.0:
            h *= 0.5
            continue
        prev = z
        z, xi, xj = z5, xi_n, xj_n
        s_total += h
        points.append(z)
        pairs.append((xi, xj))
        chain.append(chain[-1] + T5)
        h = min(config.h_max,
                h * min(5.0, 0.9 * (tol / err) ** 0.2 if err > 0 else 5.0))

        if disarmed:
            disarmed = {i for i in disarmed if abs(z - zeros[i]) < arm_radius}
        if zeros:
            near = min(range(len(zeros)), key=lambda i: abs(z - zeros[i]))
            if near not in disarmed and abs(z - zeros[near]) < config.delta_hit:
                status, hit = "hit_zero", near
                break
        if abs(z) > esc:
            outward = outward + 1 if (z.conjugate() * (z - prev)).real > 0 else 0
            if outward >= config.outward_steps:
                status = "escaped"
                break
        if s_total > config.max_arclength or len(points) >= config.max_points:
            status = "truncated"
            break

    return Trajectory(points, pairs, chain, status, hit, seed, seed.theta)


# ----------------------------------------------------------------------
# polyline intersections
# ----------------------------------------------------------------------

def polyline_intersections(pA, pB, chunk=64):
    """All transversal crossings of two polylines.

    Returns a list of (z, ia, ta, ib, tb): crossing point, segment index
    and local parameter on each polyline.  Bounding-box pruned on chunks
    of `chunk` segments, exact parametric solve inside.
    """
    nA, nB = len(pA) - 1, len(pB) - 1
    if nA < 1 or nB < 1:
        return []
    out = []
    for sa in range(0, nA, chunk):
        ea = min(nA, sa + chunk)
        segA = pA[sa:ea + 1]
        ax0, ax1 = segA.real.min(), segA.real.max()
        ay0, ay1 = segA.imag.min(), segA.imag.max()
        for sb in range(0, nB, chunk):
            eb = min(nB, sb + chunk)
            segB = pB[sb:eb + 1]
            if (ax0 > segB.real.max() or segB.real.min() > ax1 or
                    ay0 > segB.imag.max() or segB.imag.min() > ay1):
                continue
            a0 = pA[sa:ea][:, None]
            d1 = (pA[sa + 1:ea + 1] - pA[sa:ea])[:, None]
            b0 = pB[sb:eb][None, :]
            d2 = (pB[sb + 1:eb + 1] - pB[sb:eb])[None, :]
            w = b0 - a0
            den = (d1.conjugate() * d2).imag
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (w.conjugate() * d2).imag / den
                s = (w.conjugate() * d1).imag / den
            mask = (np.abs(den) > 1e-30) & (t >= 0) & (t < 1) & (s >= 0) & (s < 1)
            for ia_loc, ib_loc in zip(*np.nonzero(mask)):
                ia, ib = sa + int(ia_loc), sb + int(ib_loc)
                tt = float(t[ia_loc, ib_loc])
                ss = float(s[ia_loc, ib_loc])
                zc = pA[ia] + (pA[ia + 1] - pA[ia]) * tt
                out.append((complex(zc), ia, tt, ib, ss))
    return out


def _interp_pair(traj, idx, t):
    a0, b0 = traj.pairs[idx]
    a1, b1 = traj.pairs[idx + 1]
    return (a0 + (a1 - a0) * t, b0 + (b1 - b0) * t)


def _interp_chain(traj, idx, t):
    return traj.chain[idx] + (traj.chain[idx + 1] - traj.chain[idx]) * t


def _snap_pair(curve, z, pair):
    rts = cube_roots(-curve.polynomial(z))
    return tuple(min(rts, key=lambda r: abs(r - v)) for v in pair)


# ----------------------------------------------------------------------
# the network
# ----------------------------------------------------------------------

@dataclass
class Junction:
    point: complex
    parents: tuple                # (trajectory index, trajectory index)
    child: int
    parent_params: tuple          # ((segment, t), (segment, t))


@dataclass
class MarkedPoint:
    angle: float
    label: tuple                  # ordered sheet pair in the walk frame
    trajectories: list


@dataclass
class SpectralNetwork:
    theta: float
    trajectories: list
    junctions: list
    infinity_marks: list = field(default_factory=list)
    final_arcs: list = field(default_factory=list)    # (mid_angle, fading_sheet)
    initial_arcs: list = field(default_factory=list)
    bps_ful: bool = False
    head_on_points: list = field(default_factory=list)

    @property
    def n_born(self):
        return len(self.junctions)


def _classify_crossing(curve, trajA, trajB, hit, dedup, known_points):
    """One crossing: ("birth", (z, child_pair)) / ("head_on", z) / (None, None).

    Crossings within the dedup radius of a known junction or of either
    trajectory's first point are discarded (they are re-detections of an
    existing junction or of a child's own birth point).
    """
    z, ia, ta, ib, tb = hit
    for zk in known_points:
        if abs(z - zk) < dedup:
            return (None, None)
    if abs(z - trajA.points[0]) < dedup or abs(z - trajB.points[0]) < dedup:
        return (None, None)
    pairA = _snap_pair(curve, z, _interp_pair(trajA, ia, ta))
    pairB = _snap_pair(curve, z, _interp_pair(trajB, ib, tb))
    rts = cube_roots(-curve.polynomial(z))
    sep = min(abs(rts[0] - rts[1]), abs(rts[1] - rts[2]), abs(rts[0] - rts[2]))
    tol = max(1e-6 * sep, 1e-12)

    def same(u, v):
        return abs(u - v) <= tol

    if same(pairA[0], pairB[1]) and same(pairA[1], pairB[0]):
        return ("head_on", z)
    for p1, p2 in ((pairA, pairB), (pairB, pairA)):
        if same(p1[1], p2[0]) and not same(p1[0], p2[1]):
            return ("birth", (z, (p1[0], p2[1])))
    return (None, None)


def grow_network(curve, theta, config=None, classify=True):
    """Grow the full network at one phase by the junction birth rule."""
    config = config or TraceConfig()
    seeds = seed_critical(curve, theta, config)
    trajectories = [trace(curve, s, config) for s in seeds]
    junctions = []
    head_on = []
    tested = set()
    frontier = list(range(len(trajectories)))
    generation = 0
    while frontier:
        generation += 1
        if generation > config.generation_cap:
            raise GenerationCapExceeded(
                f"network still growing after {config.generation_cap} generations")
        known = [j.point for j in junctions] + head_on
        births = []
        arrays = [t.points_array() for t in trajectories]
        for i in frontier:
            for j in range(len(trajectories)):
                key = (min(i, j), max(i, j))
                if i == j or key in tested:
                    continue
                tested.add(key)
                for hit in polyline_intersections(arrays[key[0]], arrays[key[1]]):
                    kind, payload = _classify_crossing(
                        curve, trajectories[key[0]], trajectories[key[1]],
                        hit, config.dedup_radius, known)
                    if kind == "head_on":
                        head_on.append(payload)
                        known.append(payload)
                    elif kind == "birth":
                        z, child_pair = payload
                        births.append((key, hit, z, child_pair))
                        known.append(z)
        frontier = []
        for (key, hit, z, child_pair) in births:
            seed = TrajectorySeed(z=z, pair=child_pair,
                                  origin=("junction", key[0], key[1]),
                                  theta=theta)
            child = trace(curve, seed, config)
            idx = len(trajectories)
            trajectories.append(child)
            frontier.append(idx)
            junctions.append(Junction(point=z, parents=key, child=idx,
                                      parent_params=((hit[1], hit[2]),
                                                     (hit[3], hit[4]))))

    net = SpectralNetwork(
        theta=theta,
        trajectories=trajectories,
        junctions=junctions,
        head_on_points=head_on,
        bps_ful=bool(head_on) or any(t.status == "hit_zero" for t in trajectories),
    )
    if classify and all(t.status == "escaped" for t in trajectories):
        classify_infinity(curve, net)
    return net


# ----------------------------------------------------------------------
# the circle at infinity
# ----------------------------------------------------------------------

def direction_grid(curve, theta):
    """The 2n+6 exact asymptotic directions at phase theta.

    Escape directions solve ((n+3)/3) * angle = theta - arg(root difference
    constant) mod 2pi; the root-difference arguments are pi/2 + k*pi/3, so
    the directions form a uniform grid of spacing pi/(n+3).
    """
    n = curve.polynomial.degree
    mu = curve.polynomial.leading_coefficient
    step = math.pi / (n + 3)
    base = ((3.0 * theta - cmath.phase(-mu) - 1.5 * math.pi) / (n + 3)) % step
    return [base + k * step for k in range(2 * n + 6)], step


def classify_infinity(curve, net):
    """Snap escape directions onto the exact grid and label the marks.

    Sheet labels live in a frame transported continuously around a circle
    at the escape radius starting from the first mark; the first/last
    alternation of consecutive labels is validated (up to the sheet
    permutation picked up by going once around infinity), and the final
    arcs with their fading sheets are recorded on the network.
    """
    if not all(t.status == "escaped" for t in net.trajectories):
        raise ValidationError("classify_infinity needs every trajectory escaped")
    n = curve.polynomial.degree
    grid, step = direction_grid(curve, net.theta)
    occupied = {}
    for ti, traj in enumerate(net.trajectories):
        ang = cmath.phase(traj.points[-1]) % TWO_PI
        k = min(range(len(grid)), key=lambda i: abs(_wrap(ang - grid[i])))
        err = abs(_wrap(ang - grid[k]))
        if err > 0.4 * step:
            raise PatternViolation(
                f"trajectory {ti} escapes {err:.3f} rad off the direction grid")
        occupied.setdefault(k, []).append(ti)
    if len(occupied) != 2 * n + 6:
        raise PatternViolation(
            f"{len(occupied)} asymptotic directions occupied, expected {2 * n + 6}")

    R = max(abs(t.points[-1]) for t in net.trajectories)
    ks = sorted(occupied)
    ang0 = grid[ks[0]]
    x_start = cube_roots(-curve.polynomial(R * cmath.exp(1j * ang0)))[0]
    x_frame = x_start
    frame_angle = ang0
    marks = []

    def walk_to(target):
        nonlocal x_frame, frame_angle
        nsub = max(2, int(abs(target - frame_angle) / 0.02) + 1)
        for m in range(1, nsub + 1):
            a = frame_angle + (target - frame_angle) * m / nsub
            x_frame = _nearest_root(curve, R * cmath.exp(1j * a), x_frame)
        frame_angle = target

    for k in ks:
        walk_to(grid[k])
        labels = set()
        for ti in occupied[k]:
            traj = net.trajectories[ti]
            zf = traj.points[-1]
            xf = x_frame
            zc = R * cmath.exp(1j * cmath.phase(zf))
            for m in range(1, 5):
                xf = _nearest_root(curve, zc + (zf - zc) * m / 4.0, xf)
            fr = (xf, xf * OMEGA, xf * OMEGA * OMEGA)
            i = min(range(3), key=lambda s: abs(fr[s] - traj.pairs[-1][0]))
            j = min(range(3), key=lambda s: abs(fr[s] - traj.pairs[-1][1]))
            labels.add((i, j))
        if len(labels) != 1:
            raise PatternViolation(
                f"conflicting labels {sorted(labels)} at direction {grid[k]:.4f}")
        marks.append(MarkedPoint(angle=grid[k], label=labels.pop(),
                                 trajectories=sorted(occupied[k])))

    # transport the frame the rest of the way around to get the wrap shift
    walk_to(ang0 + TWO_PI)
    shift = min(range(3),
                key=lambda s: abs(x_start * OMEGA ** s - x_frame))
    _validate_alternation(curve, marks, shift, net)
    net.infinity_marks = marks
    return marks


def _validate_alternation(curve, marks, wrap_shift, net):
    """Consecutive labels share one index in alternating position."""
    n = curve.polynomial.degree
    m = len(marks)
    shared_pos = []
    for a in range(m):
        la = marks[a].label
        if a < m - 1:
            lb = marks[a + 1].label
        else:
            # first mark's label seen in the end-of-walk frame
            lb = tuple((s - wrap_shift) % 3 for s in marks[0].label)
        if la[0] == lb[0] and la[1] != lb[1]:
            shared_pos.append(0)
        elif la[1] == lb[1] and la[0] != lb[0]:
            shared_pos.append(1)
        else:
            raise PatternViolation(
                f"labels {la} -> {lb} between marks {a} and {(a + 1) % m} "
                f"do not chain")
    for a in range(m):
        if shared_pos[a] == shared_pos[(a + 1) % m]:
            raise PatternViolation("alternation of shared label positions broken")
    net.final_arcs = []
    net.initial_arcs = []
    for a in range(m):
        b = (a + 1) % m
        mid = (marks[a].angle +
               0.5 * ((marks[b].angle - marks[a].angle) % TWO_PI)) % TWO_PI
        if shared_pos[a] == 1:
            net.final_arcs.append((mid, marks[a].label[1]))
        else:
            net.initial_arcs.append((mid, marks[a].label[0]))
    if len(net.final_arcs) != n + 3 or len(net.initial_arcs) != n + 3:
        raise PatternViolation(
            f"{len(net.final_arcs)} final / {len(net.initial_arcs)} initial "
            f"arcs, expected {n + 3} of each")


# ----------------------------------------------------------------------
# finite webs / BPS detection
# ----------------------------------------------------------------------

@dataclass
class FiniteWeb:
    theta_star: float
    charge: Charge
    topology: str                 # "single_string" | "three_string_junction"
    period: complex
    residual: float
    zeros: tuple                  # indices of the zeroes involved
    segments: list = field(default_factory=list)   # constituent polylines
    detail: dict = field(default_factory=dict)


def identify_charge(Z_web, period_map, residual_rel=1e-4, max_coeff=4):
    """Integer charge whose period matches Z_web, by bounded enumeration.

    The match must be unique inside the coefficient box; a second candidate
    within tolerance, or none at all, raises ChargeIdentificationFailed.
    """
    rank = period_map.rank
    rng = np.arange(-max_coeff, max_coeff + 1)
    grids = np.meshgrid(*([rng] * rank), indexing="ij")
    combos = np.stack([g.ravel() for g in grids], axis=1)
    vals = combos @ period_map.basis_values
    d = np.abs(vals - Z_web)
    tol = residual_rel * max(abs(Z_web), 1e-12)
    inside = np.nonzero(d <= tol)[0]
    if len(inside) == 0:
        raise ChargeIdentificationFailed(
            f"no charge within {tol:.2e} of Z = {Z_web:.6f} "
            f"(closest residual {d.min():.2e})")
    if len(inside) > 1:
        raise ChargeIdentificationFailed(f"ambiguous charge for Z = {Z_web:.6f}")
    ch = Charge(combos[inside[0]])
    if ch.is_zero():
        raise ChargeIdentificationFailed("web period matches the zero charge")
    return ch, float(d[inside[0]])


def _signed_miss(traj, z0, window):
    """Signed closest approach of a trajectory to the zero z0.

    Positive when the zero lies to the left of the travel direction;
    exactly 0.0 for a recorded hit.  None when the approach is farther
    than the window or happens at the very start of the polyline.
    """
    pts = traj.points
    d = [abs(p - z0) for p in pts]
    k = d.index(min(d))
    if traj.status == "hit_zero" and d[k] < window:
        return 0.0
    if d[k] > window or k == 0:
        return None
    v = pts[k + 1] - pts[k] if k < len(pts) - 1 else pts[k] - pts[k - 1]
    sgn = (v.conjugate() * (z0 - pts[k])).imag
    return d[k] if sgn >= 0 else -d[k]


class _ScanPoint:
    """Sweep state at one phase: critical trajectories (with persistent ray
    ids) plus first-generation junction children."""

    def __init__(self, curve, theta, config, ray_book, generations=1):
        self.theta = theta
        self.critical = {}
        book = ray_book.rays_at(theta)
        for zi, entries in book.items():
            z0 = curve.ramification_points[zi]
            for rid, phi, pair in entries:
                seed = TrajectorySeed(
                    z=z0 + config.delta0 * cmath.exp(1j * phi),
                    pair=pair, origin=("critical", zi, rid, phi), theta=theta)
                self.critical[(zi, rid)] = trace(curve, seed, config)
        self.children = {}
        self.child_meta = {}
        if generations >= 1:
            self._grow_children(curve, config)

    def _grow_children(self, curve, config):
        keys = sorted(self.critical)
        arrays = {k: self.critical[k].points_array() for k in keys}
        for a in range(len(keys)):
            for b in range(a + 1, len(keys)):
                ka, kb = keys[a], keys[b]
                hits = polyline_intersections(arrays[ka], arrays[kb])
                hits.sort(key=lambda h: h[1] + h[2])
                for hit in hits:
                    kind, payload = _classify_crossing(
                        curve, self.critical[ka], self.critical[kb],
                        hit, config.dedup_radius, [])
                    if kind != "birth":
                        continue
                    ck = (ka, kb)
                    if ck in self.children:
                        continue
                    z, child_pair = payload
                    seed = TrajectorySeed(z=z, pair=child_pair,
                                          origin=("junction", ka, kb),
                                          theta=self.theta)
                    self.children[ck] = trace(curve, seed, config)
                    self.child_meta[ck] = hit

    def trajectory_for(self, event_key):
        kind, key = event_key
        return self.critical.get(key) if kind == "c" else self.children.get(key)

    def events(self, curve, window):
        """{("c"|"j", key, target_zero): signed miss} at this phase."""
        out = {}
        for key, traj in self.critical.items():
            for zi, z0 in enumerate(curve.ramification_points):
                if zi == key[0]:
                    continue
                miss = _signed_miss(traj, z0, window)
                if miss is not None:
                    out[("c", key, zi)] = miss
        for ck, traj in self.children.items():
            for zi, z0 in enumerate(curve.ramification_points):
                miss = _signed_miss(traj, z0, window)
                if miss is not None:
                    out[("j", ck, zi)] = miss
        return out


def _scan_trace_config(base, curve):
    r = 2.5 * max(abs(z) for z in curve.ramification_points) + 3.0
    return TraceConfig(
        escape_radius=r, delta0=base.delta0, delta_hit=base.delta_hit,
        rk_tol=max(base.rk_tol, 1e-7), h_max=base.h_max,
        dedup_radius=base.dedup_radius, generation_cap=base.generation_cap)


def _assembly_trace_config(base, curve):
    r = 2.5 * max(abs(z) for z in curve.ramification_points) + 3.0
    return TraceConfig(
        escape_radius=r, delta0=1e-5, delta_hit=1e-5, rk_tol=1e-10,
        h_max=min(base.h_max, 0.25), dedup_radius=base.dedup_radius,
        generation_cap=base.generation_cap)


def _endpoint_chain_correction(traj, idx, zero):
    """Missing chain piece between a truncated endpoint and the zero itself.

    Near a simple zero |u| grows like c * r^(1/3), so the missing integral
    of |u| over the last stretch of length r is (3/4) |u(endpoint)| * r.
    """
    r = abs(traj.points[idx] - zero)
    u = abs(traj.pairs[idx][0] - traj.pairs[idx][1])
    return 0.75 * u * r


def _assemble_web(curve, theta_star, event, base_config, period_map,
                  residual_rel, charge_box, ray_book):
    """Re-refine the phase at assembly quality, then identify the charge.

    The scan-quality bisection carries a small systematic offset from the
    coarser seeding; a second bisection with the fine tracer removes it,
    which matters because the chain integral is first-order sensitive to
    the phase error.
    """
    kind, key, zi_target = event
    cfg = _assembly_trace_config(base_config, curve)
    sep = min(abs(a - b)
              for i, a in enumerate(curve.ramification_points)
              for b in curve.ramification_points[i + 1:])
    window = 0.35 * sep
    z_t = curve.ramification_points[zi_target]
    bracket = 2.5e-4
    th_a, th_b = theta_star - bracket, theta_star + bracket

    def miss_at(th):
        pt = _ScanPoint(curve, th, cfg, ray_book,
                        generations=1 if kind == "j" else 0)
        tr = pt.trajectory_for((kind, key))
        return (None if tr is None else _signed_miss(tr, z_t, window)), pt

    m_a, _ = miss_at(th_a)
    m_b, _ = miss_at(th_b)
    if m_a is not None and m_b is not None and (m_a < 0) != (m_b < 0):
        for _ in range(40):
            mid = 0.5 * (th_a + th_b)
            m_mid, _ = miss_at(mid)
            if m_mid is None:
                break
            if m_mid == 0.0:
                th_a = th_b = mid
                break
            if (m_mid < 0) == (m_a < 0):
                th_a, m_a = mid, m_mid
            else:
                th_b = mid
            if abs(th_b - th_a) < 1e-9:
                break
        theta_star = 0.5 * (th_a + th_b)

    point = _ScanPoint(curve, theta_star, cfg, ray_book,
                       generations=1 if kind == "j" else 0)
    zeros = curve.ramification_points
    eith = cmath.exp(1j * theta_star)
    z_target = zeros[zi_target]

    if kind == "c":
        traj = point.critical.get(key)
        if traj is None:
            raise NumericalError("lost the critical ray during web assembly")
        d = [abs(p - z_target) for p in traj.points]
        kmin = d.index(min(d))
        if d[kmin] > 100 * cfg.delta_hit:
            raise NumericalError(
                f"assembled trajectory misses the zero by {d[kmin]:.2e}")
        T = traj.chain[kmin]
        T += _endpoint_chain_correction(traj, 0, zeros[key[0]])
        T += _endpoint_chain_correction(traj, kmin, z_target)
        Z = eith * T
        charge, res = identify_charge(Z, period_map, residual_rel, charge_box)
        return FiniteWeb(theta_star=theta_star, charge=charge,
                         topology="single_string", period=Z, residual=res,
                         zeros=(key[0], zi_target),
                         segments=[traj.points[:kmin + 1]],
                         detail={"miss": d[kmin]})

    child = point.children.get(key)
    if child is None:
        raise NumericalError("lost the junction child during web assembly")
    zJ, ia, ta, ib, tb = point.child_meta[key]
    pa, pb = key
    trajA, trajB = point.critical[pa], point.critical[pb]
    d = [abs(p - z_target) for p in child.points]
    kmin = d.index(min(d))
    if d[kmin] > 100 * cfg.delta_hit:
        raise NumericalError(f"assembled child misses the zero by {d[kmin]:.2e}")
    T = (_interp_chain(trajA, ia, ta) + _interp_chain(trajB, ib, tb)
         + child.chain[kmin])
    T += _endpoint_chain_correction(trajA, 0, zeros[pa[0]])
    T += _endpoint_chain_correction(trajB, 0, zeros[pb[0]])
    T += _endpoint_chain_correction(child, kmin, z_target)
    Z = eith * T
    charge, res = identify_charge(Z, period_map, residual_rel, charge_box)
    return FiniteWeb(theta_star=theta_star, charge=charge,
                     topology="three_string_junction", period=Z, residual=res,
                     zeros=(pa[0], pb[0], zi_target),
                     segments=[trajA.points[:ia + 1] + [zJ],
                               trajB.points[:ib + 1] + [zJ],
                               child.points[:kmin + 1]],
                     detail={"miss": d[kmin], "junction": zJ})


def detect_bps(curve, lattice, theta_range, config=None, period_map=None,
               scan_step=math.pi / 300, residual_rel=1e-4, charge_box=4,
               theta_tol=1e-6, scan_generations=1, progress=None):
    """Scan a phase interval for finite webs and identify their charges.

    Webs are located by bisection on the sign change of the signed miss
    distance between a trajectory and a zero of P0; supported topologies
    are single strings (a critical trajectory hits another zero) and
    three-string junctions (a first-generation child hits a zero).
    Deeper-generation webs are outside the supported set.
    Returns FiniteWeb records sorted by phase.
    """
    if scan_generations > 1:
        raise UnsupportedWebTopology(
            "only single strings and three-string junctions are supported; "
            "scan_generations must be 1")
    base = config or TraceConfig()
    cfg = _scan_trace_config(base, curve)
    pm = period_map or PeriodMap.compute(curve, lattice)
    lo, hi = theta_range
    n_steps = max(2, int(math.ceil((hi - lo) / scan_step)))
    thetas = [lo + (hi - lo) * k / n_steps for k in range(n_steps + 1)]
    sep = min(abs(a - b)
              for i, a in enumerate(curve.ramification_points)
              for b in curve.ramification_points[i + 1:])
    window = 0.35 * sep

    ray_book = RayBook(curve, cfg.delta0)
    webs = []
    seen = set()
    prev = None
    for idx, th in enumerate(thetas):
        point = _ScanPoint(curve, th, cfg, ray_book, generations=scan_generations)
        events = point.events(curve, window)
        if progress:
            progress(idx, len(thetas), th, len(webs))
        if prev is not None:
            th_prev, prev_events = prev
            for ev, m1 in events.items():
                m0 = prev_events.get(ev)
                if m0 is None:
                    continue
                if not ((m0 < 0) != (m1 < 0) or m0 == 0.0 or m1 == 0.0):
                    continue
                if m0 == 0.0 or m1 == 0.0:
                    # an exact hit at a grid point: the assembly pass
                    # re-refines inside its own bracket
                    th_star = th_prev if m0 == 0.0 else th
                else:
                    th_star = _bisect_event(curve, ev, th_prev, th, m0, cfg,
                                            ray_book, window, theta_tol)
                if th_star is None:
                    continue
                try:
                    web = _assemble_web(curve, th_star, ev, base, pm,
                                        residual_rel, charge_box, ray_book)
                except NumericalError:
                    continue
                if web.charge.components in seen:
                    continue
                seen.add(web.charge.components)
                webs.append(web)
        prev = (th, events)
    webs.sort(key=lambda w: w.theta_star)
    return webs


def _bisect_event(curve, event, th_a, th_b, m_a, cfg, ray_book, window, tol):
    kind, key, zi = event
    z0 = curve.ramification_points[zi]
    for _ in range(80):
        mid = 0.5 * (th_a + th_b)
        point = _ScanPoint(curve, mid, cfg, ray_book,
                           generations=1 if kind == "j" else 0)
        traj = point.trajectory_for((kind, key))
        if traj is None:
            return None
        m_mid = _signed_miss(traj, z0, window)
        if m_mid is None:
            return None
        if m_mid == 0.0:
            return mid
        if (m_mid < 0) == (m_a < 0):
            th_a, m_a = mid, m_mid
        else:
            th_b = mid
        if abs(th_b - th_a) < tol:
            break
    return 0.5 * (th_a + th_b)
