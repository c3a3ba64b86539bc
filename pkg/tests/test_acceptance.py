"""End-to-end acceptance checks, one test per criterion.

Each test records a verdict line through ``record_criterion``; the verdicts
are listed in the terminal summary whether or not the assertion holds.
"""
import copy
import io
import os
import time

import numpy as np
import pytest

from orion_dtn.arma import (
    ArmaOnlineState,
    ArmaParams,
    fit_batch,
    forecast_next,
    online_update,
    simulate_arma,
    yule_walker_ar2,
)
from orion_dtn.cli import main as cli_main
from orion_dtn.contacts import NeighborContactState
from orion_dtn.experiment import parse_config, run_matrix, trend_cells
from orion_dtn.protocols.prophet import (
    ProphetState,
    prophet_age,
    prophet_transitivity,
    prophet_update,
)
from orion_dtn.simcore import Protocol, ScenarioConfig, Simulation

from conftest import theoretical_ar2_autocov


def sample_triangle(rng, count):
    out = []
    while len(out) < count:
        phi1, phi2 = rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 1.0)
        if phi1 + phi2 < 1 and phi2 - phi1 < 1 and abs(phi2) < 1:
            out.append((phi1, phi2))
    return out


def test_yule_walker_exactness(record_criterion):
    start = time.perf_counter()
    worst = 0.0
    for phi1, phi2 in sample_triangle(np.random.default_rng(101), 100):
        est1, est2, _ = yule_walker_ar2(*theoretical_ar2_autocov(phi1, phi2))
        worst = max(worst, abs(est1 - phi1), abs(est2 - phi2))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 1.0
    record_criterion(1, ok, f"max coefficient error {worst:.2e} over 100 points, {elapsed:.3f}s")
    assert ok


def test_estimator_consistency(record_criterion):
    start = time.perf_counter()
    y = simulate_arma(ArmaParams(10.0, 0.5, 0.2, 0.0, 1.0), 10_000, seed=7)
    state = ArmaOnlineState()
    for v in y:
        online_update(state, v)
    online, batch = state.params, fit_batch(y)
    rel = max(
        abs(a - b) / max(abs(b), 1e-300) for a, b in zip(online.as_tuple(), batch.as_tuple())
    )
    err = max(abs(online.phi1 - 0.5), abs(online.phi2 - 0.2), abs(batch.phi1 - 0.5), abs(batch.phi2 - 0.2))
    elapsed = time.perf_counter() - start
    ok = rel <= 1e-9 and err < 0.05 and elapsed < 5.0
    record_criterion(
        2, ok, f"online/batch relative gap {rel:.1e}, max |phi_hat - phi| {err:.4f}, {elapsed:.2f}s"
    )
    assert ok


def frozen_forecasts(params, y, start):
    """One-step forecasts of y[start:] from fixed parameters, residuals recursed from zero."""
    mu, phi1, phi2, theta = params.mu, params.phi1, params.phi2, params.theta1
    eps = 0.0
    out = np.empty(len(y) - start)
    for t in range(start, len(y)):
        f = max(0.0, mu + phi1 * (y[t - 1] - mu) + phi2 * (y[t - 2] - mu) + theta * eps)
        out[t - start] = f
        eps = y[t] - f
    return out


def test_online_beats_naive(record_criterion):
    start = time.perf_counter()
    y = simulate_arma(ArmaParams(20.0, 0.5, 0.2, 0.3, 1.0), 2000, seed=2024)
    assert y.min() >= 0.0
    state = ArmaOnlineState()
    online = np.empty(len(y))
    for t, v in enumerate(y):
        online[t] = forecast_next(state)
        online_update(state, v)
    burn = 5
    mse_online = float(np.mean((y[burn:] - online[burn:]) ** 2))
    mse_naive = float(np.mean((y[burn:] - y[burn - 1 : -1]) ** 2))

    frozen = frozen_forecasts(fit_batch(y[:500]), y, 500)
    tail_online = float(np.mean((y[-500:] - online[-500:]) ** 2))
    tail_frozen = float(np.mean((y[-500:] - frozen[-500:]) ** 2))
    elapsed = time.perf_counter() - start
    ok = mse_online < mse_naive and tail_online <= 1.05 * tail_frozen and elapsed < 5.0
    record_criterion(
        3,
        ok,
        f"MSE online {mse_online:.4f} vs naive {mse_naive:.4f}; "
        f"final 500 online {tail_online:.4f} vs frozen {tail_frozen:.4f}, {elapsed:.2f}s",
    )
    assert ok


def test_contact_series_reconstruction(record_criterion):
    start = time.perf_counter()
    on, off, cycles = 20, 40, 10
    presence = ([True] * on + [False] * off) * cycles
    state = NeighborContactState(1, delta_t=1.0)
    prediction_error = None
    first = None
    for k, heard in enumerate(presence, start=1):
        t = float(k)
        if heard:
            first = t if first is None else first
            state.record_hello(t)
        else:
            state.tick(t, 1.0)
        # ten seconds into the gap after the third contact
        if k == 3 * (on + off) + on + 10:
            truth = 4 * (on + off) + 1.0
            prediction_error = abs(state.predict_next_contact(t).next_contact_start - truth)
    end = float(len(presence))
    c, cbar = state.c_history, state.cbar_history
    series_ok = c in ([20.0] * 9, [20.0] * 10) and cbar == [40.0] * 9
    conserved = first + sum(c) + sum(cbar) + (end - state.phase_start) == end
    elapsed = time.perf_counter() - start
    ok = series_ok and conserved and prediction_error <= 2.0 and elapsed < 1.0
    record_criterion(
        4,
        ok,
        f"C={len(c)}x{c[0]:g} Cbar={len(cbar)}x{cbar[0]:g}, conservation {conserved}, "
        f"prediction error {prediction_error:g}s, {elapsed:.3f}s",
    )
    assert ok


def random_prophet_sequence(rng, nodes=8, length=30):
    state = ProphetState(0, capacity=nodes)
    t = 0.0
    for _ in range(length):
        op = rng.integers(3)
        if op == 0:
            prophet_update(state, int(rng.integers(1, nodes)))
        elif op == 1:
            t += float(rng.integers(0, 20)) + (float(rng.uniform()) if rng.uniform() < 0.3 else 0.0)
            prophet_age(state, t)
        else:
            peer = rng.uniform(size=nodes) * (rng.uniform(size=nodes) < 0.5)
            prophet_transitivity(state, float(rng.uniform()), peer)
        v = state.vector()
        if v.min() < 0.0 or v.max() > 1.0:
            return False
    return True


def test_prophet_algebra(record_criterion):
    rng = np.random.default_rng(55)
    bounded = all(random_prophet_sequence(rng) for _ in range(10_000))

    composition = True
    for _ in range(2000):
        n1, n2 = (int(x) for x in rng.integers(0, 400, size=2))
        p = float(rng.uniform())
        split, joint = ProphetState(0), ProphetState(0)
        split.set_prob(1, p)
        joint.set_prob(1, p)
        prophet_age(split, float(n1))
        prophet_age(split, float(n1 + n2))
        prophet_age(joint, float(n1 + n2))
        composition &= split.prob(1) == joint.prob(1)

    s = ProphetState(0)
    ex1 = prophet_update(s, 1).prob(1)
    s = ProphetState(0)
    s.set_prob(1, 0.8)
    ex2 = prophet_age(s, 10.0).prob(1)
    ex3 = prophet_transitivity(ProphetState(0), 1.0, {2: 1.0}).prob(2)
    examples = abs(ex1 - 0.75) <= 1e-9 and abs(ex2 - 0.6536582455100375) <= 1e-9 and abs(ex3 - 0.25) <= 1e-9

    ok = bounded and composition and examples
    record_criterion(
        5,
        ok,
        f"10000 sequences bounded {bounded}, aging composition exact {composition}, "
        f"examples {ex1:.9f}/{ex2:.9f}/{ex3:.9f}",
    )
    assert ok


def test_orion_custody_and_monotonicity(record_criterion):
    sim = Simulation(ScenarioConfig(node_count=70, speed=10.0, duration=600.0, seed=17))
    custody_violations = 0
    while not sim.done:
        sim.step()
        for pid in sim.undelivered():
            if len(sim.custodians(pid)) != 1:
                custody_violations += 1
        for pid in sim.delivered:
            if sim.holders.get(pid):
                custody_violations += 1

    sends = [e for e in sim.events if e.kind in ("sent", "delivered")]
    backward = sum(1 for e in sends if e.rule == "closest" and not e.dist_to < e.dist_from)
    last_sender = {}
    ping_pong = 0
    for e in sends:
        if e.kind == "sent" and last_sender.get(e.packet_id) == e.dst:
            ping_pong += 1
        last_sender[e.packet_id] = e.src
    closest = sum(1 for e in sends if e.rule == "closest")
    ok = custody_violations == 0 and backward == 0 and ping_pong == 0
    record_criterion(
        6,
        ok,
        f"{len(sends)} transmissions ({closest} criterion-1): custody violations {custody_violations}, "
        f"distance-increasing criterion-1 sends {backward}, send-backs {ping_pong}",
    )
    assert ok


@pytest.fixture(scope="module")
def default_matrix_rows():
    matrix = parse_config(
        "protocols = orion, prophet, epidemic\nnodes = 30, 70\nspeeds = 5, 10, 15, 20\nseeds = 1..10\n"
    )
    start = time.perf_counter()
    rows = run_matrix(matrix, workers=os.cpu_count() or 1)
    return rows, time.perf_counter() - start


def test_trend_reproduction(record_criterion, default_matrix_rows):
    rows, elapsed = default_matrix_rows
    cells = trend_cells(rows)
    ordered = [c for c in cells if c.fewer_hops and c.higher_psr]
    dense = [c for c in cells if c.nodes == 70]
    dense_eed = [c for c in dense if c.lower_delay]
    dense_fpa = [c for c in dense if c.earlier_first_arrival]
    share = len(ordered) / len(cells)
    failing = ", ".join(
        f"{c.nodes}n/{c.speed:g}m/s["
        + "".join(k for k, v in (("H", c.fewer_hops), ("P", c.higher_psr), ("E", c.lower_delay)) if not v)
        + "]"
        for c in cells
        if not (c.fewer_hops and c.higher_psr) or (c.nodes == 70 and not c.lower_delay)
    )
    ok = share >= 0.9 and len(dense_eed) == len(dense)
    record_criterion(
        7,
        ok,
        f"hop+PSR ordering in {len(ordered)}/{len(cells)} cells, 70-node EED {len(dense_eed)}/{len(dense)}, "
        f"70-node FPA {len(dense_fpa)}/{len(dense)}, matrix {elapsed:.0f}s; failing: {failing or 'none'}",
    )
    assert ok


def test_flooding_dominance(record_criterion, default_matrix_rows):
    rows, _ = default_matrix_rows
    by_key = {r.key: r.metrics for r in rows}
    violations = []
    for (proto, n, v, seed), m in by_key.items():
        if proto != "orion":
            continue
        epi = by_key[("epidemic", n, v, seed)]
        psr_ok = epi.psr >= m.psr
        fpa_ok = m.first_packet_arrival is None or (
            epi.first_packet_arrival is not None and epi.first_packet_arrival <= m.first_packet_arrival
        )
        if not (psr_ok and fpa_ok):
            violations.append((n, v, seed))
    checked = sum(1 for k in by_key if k[0] == "orion")
    ok = not violations
    record_criterion(8, ok, f"{checked} seeded runs compared, violations {violations or 'none'}")
    assert ok


def test_determinism(record_criterion, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("protocols = orion, prophet, epidemic\nnodes = 30\nspeeds = 10, 20\nseeds = 1..2\n")
    outputs = []
    for i in range(2):
        out = tmp_path / f"r{i}.csv"
        events = tmp_path / f"e{i}.csv"
        assert cli_main(
            ["simulate", "--config", str(cfg), "--out", str(out), "--events", str(events), "--quiet"]
        ) == 0
        outputs.append(out.read_bytes())
    event_files = sorted(p.name for p in tmp_path.glob("e0_*.csv"))
    same_events = all(
        (tmp_path / name).read_bytes() == (tmp_path / name.replace("e0_", "e1_", 1)).read_bytes()
        for name in event_files
    )
    ok = outputs[0] == outputs[1] and same_events and len(outputs[0]) > 0
    record_criterion(
        9, ok, f"results CSV identical {outputs[0] == outputs[1]} ({len(outputs[0])} bytes), "
        f"{len(event_files)} event logs identical {same_events}",
    )
    assert ok
