"""Check layer: reports, symmetry reduction, matching invariant suites."""

from morse_forge import FactorSpec, FreeProduct
from morse_forge import checks, matching
from morse_forge.graph import Ball
from morse_forge.matching import BoundaryHomeo, MatchState, run_matching


def _zz_pair():
    fp1 = FreeProduct(FactorSpec.integer_line("A1", "x"), FactorSpec.integer_line("B1", "y"))
    fp2 = FreeProduct(FactorSpec.integer_line("A2", "x"), FactorSpec.integer_line("B2", "y"))
    return fp1, fp2


def test_ball_symmetries_are_automorphisms(zz):
    ball = Ball.build(zz, 3)
    perms = checks.ball_symmetries(ball)
    assert len(perms) == 4
    for p in perms:
        assert p[0] == 0
        assert sorted(p) == list(range(len(ball)))
        for i, row in enumerate(ball.adjacency):
            image_neighbors = {p[j] for _s, j in row if j is not None}
            mapped_rows = {j for _s, j in ball.adjacency[p[i]] if j is not None}
            assert image_neighbors <= mapped_rows


def test_symmetries_commute_with_projection(lattice_product):
    fp = lattice_product
    ball = Ball.build(fp, 3)
    proj = [ball.index_of(fp.embed(fp.project_to_factor(w, fp.a.id))) for w in ball.vertices]
    for p in checks.ball_symmetries(ball):
        for i in range(len(ball)):
            assert p[proj[i]] == proj[p[i]]


def test_nbhd_nesting_free_factor(free2):
    report = checks.run_nbhd_nesting(free2)
    assert report["status"] == "pass"
    assert report["instances"] > 0


def test_ray_merge_nonvacuous(zz):
    report = checks.run_ray_merge(zz, depth=24, k_values=(1, 2, 4))
    assert report["status"] == "pass"
    assert report["instances"] > 0


def test_v_system_small(dihedral):
    # finite factors have no boundary directions, so only infinite kinds
    report = checks.run_v_system(dihedral, max_len=2, max_norm=1, i_values=(1, 2))
    assert report["status"] in ("pass", "vacuous")


def test_bijectivity_report_flags_prefix():
    fp1, fp2 = _zz_pair()
    pm = run_matching(
        fp1, fp2,
        BoundaryHomeo(fp1.a, fp2.a, "identity"),
        BoundaryHomeo(fp1.b, fp2.b, "identity"),
        rounds=6,
    )
    rep = checks.bijectivity_report(pm.a)
    assert rep["ok"] and rep["pairs"] == 13  # identity plus six rounds of two


def test_duality_nonvacuous_long_run():
    # twenty rounds stay below the tracking threshold (90 for the default
    # gauge), so a longer integer-line run is needed to exercise the
    # ray-duality check on qualifying elements
    a1 = FactorSpec.integer_line("A1", "x")
    a2 = FactorSpec.integer_line("A2", "x")
    state = MatchState(BoundaryHomeo(a1, a2, "identity"))
    for _ in range(100):
        state.step(1)
        state.step(2)
    rep = checks.duality_report(state, k_values=(1, 2, 3))
    assert rep["checked"] > 0
    assert not rep["failures"]


def test_concat_radius_five(zz):
    # the hypothesis-to-verification implication also holds one radius up
    report = checks.run_concat_qg(zz, radius=5, qg_norm_limit=1)
    assert report["status"] == "pass"
    assert report["hypothesis_held"] > 0


def test_match_report_full(tmp_path):
    fp1, fp2 = _zz_pair()
    pm = run_matching(
        fp1, fp2,
        BoundaryHomeo(fp1.a, fp2.a, "lineswap"),
        BoundaryHomeo(fp1.b, fp2.b, "identity"),
        rounds=8,
    )
    report = checks.match_report(pm)
    assert report["status"] == "pass"
    assert report["induced_containment"]["instances"] > 0
    for entry in report["pairs"]["A"]["continuity"].values():
        assert entry["status"] == "verified"


def test_transfer_table_stability():
    # empirical gauge transfer: target-ray tables never exceed the
    # initiator-ray tables in tree factors, and the frozen running-max
    # table is stable under a permuted enumeration replay
    import itertools

    from morse_forge import FactorSpace, morse

    a1 = FactorSpec.integer_line("A1", "x")
    a2 = FactorSpec.integer_line("A2", "x")
    grid = [(1, 0), (1, 2), (2, 1)]
    radius = 3

    def ray_table(spec, direction):
        ball = Ball.build(FactorSpace(spec), radius)
        path = ball.first_geodesic(0, ball.index_of(direction.realization(radius)[-1]))
        return morse.estimate_gauge(ball, path, grid)

    def negatives_first(spec):
        yield spec.identity()
        n = 1
        while True:
            yield spec.make_element(-n)
            yield spec.make_element(n)
            n += 1

    def observe(enumerations):
        state = MatchState(BoundaryHomeo(a1, a2, "identity"), enumerations=enumerations)
        for _ in range(6):
            state.step(1)
            state.step(2)
        table = {point: 0 for point in grid}
        seen = 0
        for x, info in state.meta.items():
            if info["role"] != "target" or x.spec != a2:
                continue
            seen += 1
            src_dir = state.meta[state.backward[x]]["direction"]
            src_table = ray_table(a1, src_dir)
            tgt_table = ray_table(a2, info["direction"])
            for point in grid:
                assert tgt_table.value(*point) <= max(src_table.value(*point), table[point])
                table[point] = max(table[point], tgt_table.value(*point))
        assert seen > 0
        return table

    base = observe(None)
    permuted = observe((negatives_first(a1), negatives_first(a2)))
    assert base == permuted
