"""Exhaustive finite-ball checks behind the CLI and the acceptance suite.

Every check reports the instance count it actually covered plus any
counterexamples; an empty instance family is flagged vacuous rather than
passed silently.
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import factors, matching, morse, rays
from .graph import Ball, GraphPath
from .words import FreeProduct


def _report(check: str, params: dict, instances: int, failures: list, extra: dict | None = None) -> dict:
    out = {
        "check": check,
        "params": params,
        "instances": instances,
        "counterexample_count": len(failures),
        "counterexamples": failures[:10],
        "status": "fail" if failures else ("vacuous" if instances == 0 else "pass"),
    }
    if extra:
        out.update(extra)
    return out


def _factor_copy_vertices(ball: Ball, factor_id: str) -> list[int]:
    out = []
    for i, w in enumerate(ball.vertices):
        if not w.syllables or (len(w.syllables) == 1 and w.syllables[0].factor == factor_id):
            out.append(i)
    return out


# -- prefix transit ----------------------------------------------------------


def run_prefix_transit(fp: FreeProduct, radius: int = 5, slack: int = 2, path_cap: int | None = None) -> dict:
    ball = Ball.build(fp, radius)
    instances = 0
    failures = []
    for w in range(1, len(ball)):
        word = ball.vertex(w)
        required = {ball.index_of(p) for p in fp.prefix_vertices(word)}
        paths = ball.enumerate_paths(0, w, ball.dist[w] + slack, cap=path_cap)
        for p in paths:
            instances += 1
            if not required <= set(p.vertices):
                failures.append({"w": fp.format_word(word), "path": list(p.vertices)})
    return _report(
        "prefix-transit",
        {"radius": radius, "slack": slack},
        instances,
        failures,
        {"vertices": len(ball)},
    )


# -- projection --------------------------------------------------------------


def _letter_symmetries(spec: factors.FactorSpec):
    """Letter maps of label-preserving factor automorphisms: signed
    coordinate permutations for lattices, signed generator permutations
    for free factors, sign flips for lines."""
    import itertools as _it

    bases = spec.generators_base_count()
    maps = []
    if spec.kind == factors.LINE:
        for s in (1, -1):
            maps.append({(0, 1): (0, s), (0, -1): (0, -s)})
        return maps
    if spec.kind in (factors.LATTICE, factors.FREE):
        for perm in _it.permutations(bases):
            for signs in _it.product((1, -1), repeat=len(bases)):
                m = {}
                for b in bases:
                    m[(b, 1)] = (perm[b], signs[b])
                    m[(b, -1)] = (perm[b], -signs[b])
                maps.append(m)
        return maps
    return [{(b, s): (b, s) for b in bases for s in (1, -1)}]


def _apply_letter_map(spec: factors.FactorSpec, m, x: factors.FactorElement) -> factors.FactorElement:
    if spec.kind == factors.LINE:
        return factors.FactorElement(spec, x.payload * m[(0, 1)][1])
    if spec.kind == factors.LATTICE:
        out = [0] * spec.dim
        for b, c in enumerate(x.payload):
            nb, ns = m[(b, 1)]
            out[nb] = c * ns
        return factors.FactorElement(spec, tuple(out))
    if spec.kind == factors.FREE:
        runs = []
        for b, e in x.payload:
            nb, ns = m[(b, 1)]
            runs.append((nb, e * ns))
        return factors.FactorElement(spec, tuple(runs))
    return x


def ball_symmetries(ball: Ball) -> list[list[int]]:
    """Vertex permutations of the ball induced by factor automorphisms.

    Each fixes the basepoint, preserves adjacency and both factor copies,
    and commutes with the projection, so exhaustive claims need only be
    checked on orbit representatives.
    """
    fp = ball.space
    perms = []
    for ma in _letter_symmetries(fp.a):
        for mb in _letter_symmetries(fp.b):

            def apply_word(w, ma=ma, mb=mb):
                sylls = []
                for s in w.syllables:
                    m = ma if s.factor == fp.a.id else mb
                    sylls.append(_apply_letter_map(s.spec, m, s))
                return fp.word(sylls)

            perm = [ball.index_of(apply_word(w)) for w in ball.vertices]
            perms.append(perm)
    return perms


def run_projection_qg(fp: FreeProduct, radius: int = 4, grid=((1, 0), (1, 2), (2, 1), (3, 0)), path_cap: int | None = None) -> dict:
    ball = Ball.build(fp, radius)
    copy_a = _factor_copy_vertices(ball, fp.a.id)
    proj_map = [
        ball.index_of(fp.embed(fp.project_to_factor(w, fp.a.id))) for w in ball.vertices
    ]
    n = len(ball)
    dist = [ball._true_row(u) for u in range(n)]
    symmetries = ball_symmetries(ball)
    orbits: dict[tuple[int, int], int] = {}
    for ui in range(len(copy_a)):
        for vi in range(ui, len(copy_a)):
            u, v = copy_a[ui], copy_a[vi]
            orbit = {tuple(sorted((p[u], p[v]))) for p in symmetries}
            rep = min(orbit)
            orbits[rep] = len(orbit)
    fixed = [proj_map[i] == i for i in range(n)]
    # d(x, pi(x)) bounds the Hausdorff distance in both directions, since
    # the projection of each walk vertex lies on the projected path
    proj_gap = [dist[i][proj_map[i]] for i in range(n)]
    instances = 0
    covered = 0
    failures = []
    for lam, eps in grid:
        lam_f, eps_f = Fraction(lam), Fraction(eps)
        haus_bound = lam_f * lam_f * eps_f + eps_f + 1
        for (u, v), weight in sorted(orbits.items()):
            max_gap = math.floor(lam_f * (dist[u][v] + eps_f))
            min_need = morse.min_distance_profile(lam_f, eps_f, max_gap)
            for walk in morse.enumerate_quasi_geodesics(ball, u, v, lam_f, eps_f, cap=path_cap):
                instances += 1
                covered += weight
                if all(fixed[x] for x in walk):
                    continue  # projection is the identity on such walks
                proj = [proj_map[x] for x in walk]
                easy_haus = max(proj_gap[x] for x in walk) <= haus_bound
                bad = _projection_violation(
                    dist, proj, walk, min_need, None if easy_haus else haus_bound
                )
                if bad:
                    failures.append(
                        {
                            "lam": str(lam_f),
                            "eps": str(eps_f),
                            "walk": list(walk),
                            "reason": bad,
                        }
                    )
    return _report(
        "projection-qg",
        {"radius": radius, "grid": [[str(Fraction(l)), str(Fraction(e))] for l, e in grid]},
        instances,
        failures,
        {
            "copy_vertices": len(copy_a),
            "orbit_representatives": len(orbits),
            "instances_with_symmetry": covered,
        },
    )


def _projection_violation(dist, proj, walk, min_need, haus_bound):
    # collapse the projected path into runs of constant value: inside a run
    # only the index span matters, across runs the widest index gap is the
    # binding one since the required distance grows with the gap
    runs = []
    start = 0
    for t in range(1, len(proj) + 1):
        if t == len(proj) or proj[t] != proj[start]:
            runs.append((proj[start], start, t - 1))
            start = t
    for value, s, e in runs:
        if e - s < len(min_need) and min_need[e - s]:
            return "projection lower bound"
    for i in range(len(runs)):
        vi, si, _ei = runs[i]
        row = dist[vi]
        for j in range(i + 1, len(runs)):
            vj, _sj, ej = runs[j]
            if row[vj] < min_need[ej - si]:
                return "projection lower bound"
    if haus_bound is not None:
        proj_set = sorted({v for v, _s, _e in runs})
        for x in walk:
            row = dist[x]
            if min(row[p] for p in proj_set) > haus_bound:
                return "hausdorff bound"
        walk_set = sorted(set(walk))
        for p in proj_set:
            row = dist[p]
            if min(row[x] for x in walk_set) > haus_bound:
                return "hausdorff bound"
    return None


# -- concatenation ------------------------------------------------------------


def _near_set(ball: Ball, gamma: tuple[int, ...], reach: int) -> list[int]:
    near = set(gamma)
    if reach >= 1:
        for g in gamma:
            near.update(ball.neighbors(g))
    return sorted(near)


def run_concat_qg(fp: FreeProduct, radius: int = 4, qg_norm_limit: int = 2, geodesic_cap: int = 64) -> dict:
    ball = Ball.build(fp, radius)
    families: list[tuple[str, Fraction, Fraction, list[tuple[int, ...]]]] = []
    geodesic_paths: list[tuple[int, ...]] = []
    for w in range(len(ball)):
        for p in ball.enumerate_geodesics(0, w, cap=geodesic_cap):
            geodesic_paths.append(p.vertices)
    families.append(("geodesic", Fraction(1), Fraction(0), geodesic_paths))
    qg_paths: list[tuple[int, ...]] = []
    for w in range(len(ball)):
        if ball.dist[w] > qg_norm_limit:
            continue
        for walk in morse.enumerate_quasi_geodesics(ball, 0, w, 1, 2):
            qg_paths.append(walk)
    families.append(("qg", Fraction(1), Fraction(2), qg_paths))
    instances = 0
    hypothesis_held = 0
    failures = []
    for name, lam, eps, paths in families:
        for gamma in paths:
            if len(gamma) < 2:
                continue
            reach = math.floor(Fraction(len(gamma) - 1) / (3 * lam))
            near = _near_set(ball, gamma, reach)
            closest = {}
            for p in near:
                pairs = [(ball.pair_distance(p, g), i) for i, g in enumerate(gamma)]
                closest[p] = min(pairs)
            for p in near:
                dp, tp = closest[p]
                for q in near:
                    dq, tq = closest[q]
                    if Fraction(abs(tp - tq)) < 3 * lam * (dp + dq):
                        continue
                    instances += 1
                    hypothesis_held += 1
                    path, cert = morse.concat_quasi_geodesic(
                        ball, p, q, GraphPath(gamma), lam, eps
                    )
                    if not (cert.hypothesis_held and cert.verified):
                        failures.append(
                            {
                                "family": name,
                                "gamma": list(gamma),
                                "p": p,
                                "q": q,
                                "certificate": cert.to_json_dict(),
                            }
                        )
    return _report(
        "concat-qg",
        {"radius": radius, "families": ["geodesic (1,0)", f"qg (1,2) norm<={qg_norm_limit}"]},
        instances,
        failures,
        {"hypothesis_held": hypothesis_held},
    )


# -- neighborhood nesting -----------------------------------------------------


def _branched_directions(spec: factors.FactorSpec, depths) -> list[factors.BoundaryPoint]:
    if spec.kind != factors.FREE or spec.rank < 2:
        return []
    out = []
    for m in depths:
        prefix = tuple([(0, 1)] * m + [(1, 1)])
        out.append(factors.BoundaryPoint.make(spec, prefix, ((0, 1),)))
    return out


def run_nbhd_nesting(spec: factors.FactorSpec, gauge: morse.Gauge = morse.CANONICAL_TREE_GAUGE, l_values=(1, 2, 3), pad: int = 2) -> dict:
    space = factors.FactorSpace(spec)
    plus, minus = rays.standard_line(spec)
    instances = 0
    failures = []
    checked_pairs = 0
    for z in (plus, minus):
        for l in l_values:
            k = morse.nesting_constant(l, gauge)
            ys = []
            for depth in range(k, k + pad + 1):
                ys.append(z.realization(depth)[-1])
                for d in _branched_directions(spec, [depth - 1]):
                    ys.append(d.realization(depth)[-1])
            center_k = morse.Neighborhood.around_ray(gauge, k, z.realization(k), filled=True)
            ys = [y for y in ys if morse.neighborhood_member(space, center_k, y)]
            directions = [plus, minus] + _branched_directions(spec, [k - 1, k, k + 1])
            elements = [z.realization(d)[-1] for d in range(k, k + pad + 1)]
            target = morse.Neighborhood.around_ray(gauge, l, z.realization(l), filled=True)
            for y in ys:
                checked_pairs += 1
                inner_rays = morse.Neighborhood.around_vertex(space, gauge, k, y, filled=False)
                inner_filled = morse.Neighborhood.around_vertex(space, gauge, k, y, filled=True)
                for w in directions:
                    if morse.neighborhood_member(space, inner_rays, w.realization(k)):
                        instances += 1
                        if not morse.neighborhood_member(space, target, w.realization(l)):
                            failures.append({"z": z.format(), "l": l, "y": repr(y), "w": w.format()})
                for w in elements:
                    if w.norm() < k:
                        continue
                    if morse.neighborhood_member(space, inner_filled, w):
                        instances += 1
                        if not morse.neighborhood_member(space, target, w):
                            failures.append({"z": z.format(), "l": l, "y": repr(y), "w": repr(w)})
    return _report(
        "nbhd-nesting",
        {"factor": spec.id, "l_values": list(l_values)},
        instances,
        failures,
        {"members_checked": checked_pairs},
    )


# -- ray merging ---------------------------------------------------------------


def run_ray_merge(fp: FreeProduct, depth: int = 36, k_values=(1, 2, 3, 4), max_len: int = 2, max_norm: int = 1) -> dict:
    gauge = morse.CANONICAL_TREE_GAUGE
    delta = morse.delta_of(gauge)
    population = rays.comb_population(fp, max_len=max_len, max_norm=max_norm, max_infinite_prefix=1)
    realized = [rays.realize(a, depth, validate=False).vertices for a in population]
    instances = 0
    failures = []
    for ai in range(len(realized)):
        for bi in range(len(realized)):
            profile = [fp.distance(realized[ai][t], realized[bi][t]) for t in range(depth + 1)]
            for k in k_values:
                if depth < 6 * k:
                    continue
                if max(profile) < k:
                    instances += 1
                    horizon = depth - 2 * k
                    if any(d != 0 and d >= delta for d in profile[: horizon + 1]):
                        failures.append({"a": population[ai].text(), "b": population[bi].text(), "k": k})
    return _report(
        "ray-merge",
        {"depth": depth, "k_values": list(k_values)},
        instances,
        failures,
        {"rays": len(realized)},
    )


# -- fundamental system ----------------------------------------------------------


def _deep_witnesses(a: rays.CombRay, j: int) -> list[rays.CombRay]:
    """Extensions of a finite combinatorial geodesic whose next syllable is
    far along the tail ray, for non-vacuous nesting checks at depth j."""
    fp = a.fp
    tail_spec = a.tail.spec
    deep = a.tail.realization(j + 2)[-1]
    out = []
    next_spec = fp.a if tail_spec == fp.b else fp.b
    if next_spec.has_boundary():
        for end in rays.standard_line(next_spec):
            out.append(rays.CombRay(fp, rays.FINITE, a.syllables + (deep,), tail=end))
    first = next_spec.power(0, 1)
    second = tail_spec.power(0, 1)
    out.append(
        rays.CombRay(
            fp,
            rays.INFINITE,
            a.syllables + (deep,),
            repeat=(first, second),
        )
    )
    return out


def _extend_infinite(b: rays.CombRay) -> rays.CombRay:
    nxt = b.repeat[0]
    rotated = b.repeat[1:] + b.repeat[:1]
    return rays.CombRay(b.fp, rays.INFINITE, b.syllables + (nxt,), repeat=rotated)


def run_v_system(
    fp: FreeProduct,
    gauge: morse.Gauge = morse.CANONICAL_TREE_GAUGE,
    i_values=(1, 2, 3),
    max_len: int = 4,
    max_norm: int = 2,
    sample_stride: int = 21,
) -> dict:
    population = rays.comb_population(fp, max_len=max_len, max_norm=max_norm)
    max_k = max(i_values) + 1
    failures = []
    instances = 0

    def member(center, k, b) -> bool:
        return rays.comb_neighborhood_member(rays.CombNeighborhood(center, k, gauge), b)

    def level(center, b) -> int:
        out = 0
        for k in range(1, max_k + 1):
            if member(center, k, b):
                out = k
            else:
                break
        return out

    levels: list[list[int]] = []
    for a in population:
        row = [level(a, b) for b in population]
        levels.append(row)
    # property 1: a in V_k(a) for all k
    for ai, a in enumerate(population):
        for k in range(1, max_k + 1):
            instances += 1
            if not member(a, k, a):
                failures.append({"property": 1, "a": a.text(), "k": k})
    # property 2: V_max(i,j) inside V_i and V_j (levels are cumulative)
    for ai, a in enumerate(population):
        for bi, lvl in enumerate(levels[ai]):
            for i in i_values:
                for j in i_values:
                    instances += 1
                    if lvl >= max(i, j) and (lvl < i or lvl < j):
                        failures.append({"property": 2, "a": a.text(), "b": population[bi].text()})
    # property 3, infinite centers: j = i + 1 and k = j
    sample = population[::sample_stride]
    for a in sample:
        if a.kind != rays.INFINITE:
            continue
        for i in i_values:
            j = i + 1
            for bi, b in enumerate(population):
                if not member(a, j, b):
                    continue
                for ci, c in enumerate(population):
                    if member(b, j, c):
                        instances += 1
                        if not member(a, i, c):
                            failures.append(
                                {"property": 3, "a": a.text(), "b": b.text(), "c": c.text(), "i": i}
                            )
    # property 3, finite centers: j from the nesting constant
    deep_checked = 0
    for a in sample:
        if a.kind != rays.FINITE:
            continue
        for i in i_values:
            j = morse.nesting_constant(i, gauge)
            candidates = [a] + _deep_witnesses(a, j)
            for b in candidates:
                if not member(a, j, b):
                    continue
                k = j if b.kind == rays.FINITE else a.stored_length + 1
                inner = [b] + (_deep_witnesses(b, j) if b.kind == rays.FINITE else [_extend_infinite(b)])
                for c in inner:
                    if member(b, k, c):
                        instances += 1
                        deep_checked += 1
                        if not member(a, i, c):
                            failures.append(
                                {"property": 3, "a": a.text(), "b": b.text(), "c": c.text(), "i": i}
                            )
    return _report(
        "v-system",
        {"max_len": max_len, "max_norm": max_norm, "i_values": list(i_values)},
        instances,
        failures,
        {"population": len(population), "deep_instances": deep_checked},
    )


# -- round trip -------------------------------------------------------------------


def run_phi_psi(fp: FreeProduct, max_len: int = 4, max_norm: int = 2, tail_depth: int = 4) -> dict:
    population = rays.comb_population(fp, max_len=max_len, max_norm=max_norm)
    instances = 0
    failures = []
    for a in population:
        stored = sum(s.norm() for s in a.syllables)
        depth = stored + tail_depth
        ray = rays.realize(a, depth)
        instances += 1
        try:
            back = rays.decompose(fp, ray)
            if back != a:
                failures.append({"a": a.text(), "reason": "provenance decomposition differs"})
                continue
        except ValueError as exc:
            failures.append({"a": a.text(), "reason": f"decompose: {exc}"})
            continue
        bare = rays.TruncatedRay(ray.vertices, provenance=None)
        observed = rays.decompose(fp, bare)
        for pos in range(1, observed.stable_length + 1):
            if observed.syllable_at(pos) != a.syllable_at(pos):
                failures.append({"a": a.text(), "reason": f"stable syllable {pos} differs"})
                break
        else:
            rebuilt = rays.realize(observed, depth, validate=False)
            if rebuilt.vertices != ray.vertices:
                failures.append({"a": a.text(), "reason": "rebuild differs"})
    return _report(
        "phi-psi",
        {"max_len": max_len, "max_norm": max_norm, "tail_depth": tail_depth},
        instances,
        failures,
    )


# -- matching reports ----------------------------------------------------------------


def duality_report(state: matching.MatchState, k_values=(1, 2, 3)) -> dict:
    gauge = state.gauge
    delta_p = morse.delta_of(gauge)
    checked = 0
    vacuous = 0
    failures = []
    elements = sorted(state.meta, key=lambda x: (x.spec.id, x.sort_key()))
    for x in elements:
        info = state.meta[x]
        if info["direction"] is None:
            continue
        g = matching.matched_geodesic(state, x)
        space = factors.FactorSpace(x.spec)
        for k in k_values:
            threshold = morse.tracking_bound(gauge, k + morse.rational_ceil(4 * delta_p))
            if x.norm() < threshold:
                vacuous += 1
                continue
            checked += 1
            ray_inside = morse.Neighborhood.around_vertex(space, gauge, k, x, filled=False)
            ok1 = morse.neighborhood_member(space, ray_inside, g.direction.realization(k))
            filled = morse.Neighborhood.around_ray(gauge, k, g.direction.realization(k), filled=True)
            ok2 = morse.neighborhood_member(space, filled, x)
            if not (ok1 and ok2):
                failures.append({"x": repr(x), "k": k, "ray_near_x": ok1, "x_near_ray": ok2})
    return {
        "checked": checked,
        "below_threshold": vacuous,
        "failures": failures,
    }


def bijectivity_report(state: matching.MatchState) -> dict:
    forward_ok = all(state.backward.get(y) == x for x, y in state.forward.items())
    backward_ok = all(state.forward.get(x) == y for y, x in state.backward.items())
    injective = len(set(state.forward.values())) == len(state.forward)
    identity_ok = state.forward.get(state.source.identity()) == state.target.identity()
    rounds = state.steps_taken // 2
    prefix_ok = True
    for i in range(rounds):
        xs = state._enum_src.get(i)
        ys = state._enum_tgt.get(i)
        if xs is not None and xs not in state.forward:
            prefix_ok = False
        if ys is not None and ys not in state.backward:
            prefix_ok = False
    return {
        "pairs": len(state.forward),
        "mutually_inverse": forward_ok and backward_ok,
        "injective": injective,
        "identity_fixed": identity_ok,
        "alternation_prefix_matched": prefix_ok,
        "ok": forward_ok and backward_ok and injective and identity_ok and prefix_ok,
    }


def induced_containment_report(pm: matching.ProductMatching, l_values=(1, 2, 3), max_len: int = 3, max_norm: int = 2, sample_stride: int = 7) -> dict:
    population = rays.comb_population(pm.fp1, max_len=max_len, max_norm=max_norm)
    infinite_sample = [a for a in population if a.kind == rays.INFINITE][::sample_stride]
    gauge = pm.a.gauge
    instances = 0
    failures = []
    for a in infinite_sample:
        image_a = matching.induced_map(pm, a)
        for l in l_values:
            for b in population:
                if not rays.comb_neighborhood_member(rays.CombNeighborhood(a, l, gauge), b):
                    continue
                instances += 1
                image_b = matching.induced_map(pm, b)
                if not rays.comb_neighborhood_member(
                    rays.CombNeighborhood(image_a, l, gauge), image_b
                ):
                    failures.append({"a": a.text(), "b": b.text(), "l": l})
    return {"instances": instances, "sampled": len(infinite_sample), "failures": failures}


def match_report(
    pm: matching.ProductMatching,
    duality_ks=(1, 2, 3),
    containment_ls=(1, 2, 3),
    continuity_ls=(1, 2, 3),
    continuity_ball: int = 12,
    continuity_k_max: int = 12,
) -> dict:
    report: dict = {"pairs": {}}
    ok = True
    for name, state in (("A", pm.a), ("B", pm.b)):
        bij = bijectivity_report(state)
        dual = duality_report(state, duality_ks)
        transcripts_ok = all(
            rec.get("certified", True) for rec in state.records if rec.get("branch") == "boundary"
        )
        entry = {
            "bijectivity": bij,
            "duality": dual,
            "transcripts_certified": transcripts_ok,
        }
        if state.source.has_boundary():
            cont = {}
            for z in rays.standard_line(state.source):
                for l in continuity_ls:
                    r = matching.check_continuity(
                        state, z, l, ball_norm=continuity_ball, k_max=continuity_k_max
                    )
                    cont[f"{z.format()}|l={l}"] = {
                        "status": r["status"],
                        "found_k": r["found"]["k"] if r["found"] else None,
                    }
                    if r["status"] != "verified":
                        ok = False
            entry["continuity"] = cont
        report["pairs"][name] = entry
        if not (bij["ok"] and transcripts_ok and not dual["failures"]):
            ok = False
    containment = induced_containment_report(pm, containment_ls)
    report["induced_containment"] = {
        "instances": containment["instances"],
        "failures": containment["failures"][:10],
    }
    if containment["failures"]:
        ok = False
    report["status"] = "pass" if ok else "fail"
    return report
