"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line; the lines are collected again in the
terminal summary. Run ``pytest tests/test_acceptance.py -s`` to see them
inline.
"""

import math
import subprocess
import sys
import time

import numpy as np

from conftest import (
    FULL_ALPHABET,
    RCLIFFORD_ALPHABET,
    random_circuit,
    random_language,
    random_orthogonal,
    random_state,
    random_unitary,
    report_criterion,
)
from rebitsim.circuit import Circuit, dual_path_discrepancy, exact_distribution, run_logical, zero_state
from rebitsim.codec import decode_operator, decode_state, encode_operator, encode_state
from rebitsim.compiler import factor_r_unitary, length_bound, product_of_two_level, two_level_decompose
from rebitsim.gates import (
    bottom_up_residuals,
    g,
    gate_to_rlinear,
    sequence_rlinear,
    table_gates,
    table_residual,
    verify_gate_identities,
)
from rebitsim.hierarchy import (
    hierarchy_level,
    is_clifford_unitary,
    is_r_clifford,
    random_clifford_unitary,
    symmetric_pauli_root,
)
from rebitsim.paulis import PauliString, decompose_pauli, pauli_with_phase
from rebitsim.rlinear import (
    Language,
    RLinearOp,
    is_partial_antiunitary,
    is_r_unitary,
    make_kl,
    reconstruct_partial_antiunitary,
    star,
    star_all,
)
from rebitsim.stabilizer import AffineSampler, conjugate_stabilizer_state, simulate, strong_probabilities
from rebitsim.tomography import enumerate_observables, expectations, reconstruct, density_from_expectations


def _tvd(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def _state_from_generators(gens, rng):
    m = gens[0].m
    v = rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m)
    for p in gens:
        v = (v + p.matrix() @ v) / 2
    return v / np.linalg.norm(v)


def test_01_codec_round_trips(rng):
    start = time.perf_counter()
    worst = 0.0
    for trial in range(1000):
        n = trial % 6 + 1
        if trial % 2:
            psi = random_state(n, rng)
            worst = max(worst, np.max(np.abs(decode_state(encode_state(psi)) - psi)))
            phi = encode_state(psi)
            worst = max(worst, np.max(np.abs(encode_state(decode_state(phi)) - phi)))
        else:
            d = 1 << n
            op = RLinearOp(
                rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)),
                rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)),
            )
            back = decode_operator(encode_operator(op))
            worst = max(worst, np.max(np.abs(back.A - op.A)), np.max(np.abs(back.B - op.B)))
            w = rng.normal(size=(2 * d, 2 * d))
            worst = max(worst, np.max(np.abs(encode_operator(decode_operator(w)) - w)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-12 and elapsed < 10
    report_criterion(1, "codec round-trips", ok, f"max error {worst:.1e}, {elapsed:.2f} s")
    assert ok


def test_02_gate_table_certification():
    start = time.perf_counter()
    residuals = [table_residual(gate, 3) for gate in table_gates(3)]
    residuals += list(bottom_up_residuals(3).values())
    # the two spot checks, written out as real matrices
    h_anc = np.kron(np.eye(4), np.array([[1, 1], [1, -1]]) / math.sqrt(2))
    expected = sequence_rlinear([g("K"), g("G", param=math.pi / 4)], 2)
    residuals.append(decode_operator(h_anc).distance(expected))
    cx_cz = np.kron(np.eye(2), np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]))
    residuals.append(np.max(np.abs(encode_operator(gate_to_rlinear(g("S", 2), 2)) - cx_cz)))
    elapsed = time.perf_counter() - start
    worst = max(residuals)
    ok = worst < 1e-12 and elapsed < 5
    report_criterion(2, "gate-table certification", ok, f"{len(residuals)} identities, max {worst:.1e}, {elapsed:.2f} s")
    assert ok


def test_03_dual_path_simulation(rng):
    start = time.perf_counter()
    worst = 0.0
    for trial in range(500):
        n = trial % 6 + 1
        circ = random_circuit(n, int(rng.integers(0, 31)), rng, alphabet=FULL_ALPHABET)
        worst = max(worst, dual_path_discrepancy(circ, random_state(n, rng)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and elapsed < 60
    report_criterion(3, "dual-path simulation", ok, f"max discrepancy {worst:.1e}, {elapsed:.2f} s")
    assert ok


def _orthogonal_oracle(op, tol=1e-9):
    w = encode_operator(op)
    return np.linalg.norm(w.T @ w - np.eye(w.shape[0])) < tol


def test_04_r_unitarity_predicate(rng):
    disagreements = 0
    for trial in range(200):
        n = trial % 4 + 1
        if trial % 2:
            op = decode_operator(random_orthogonal(2 << n, rng))
        else:
            op = star(
                reconstruct_partial_antiunitary(
                    random_unitary(1 << n, rng), random_language(n, rng), random_unitary(1 << n, rng)
                ),
                RLinearOp.linear(random_unitary(1 << n, rng)),
            )
        disagreements += is_r_unitary(op, tol=1e-9) != _orthogonal_oracle(op)
        w = encode_operator(op) + 1e-4 * rng.normal(size=(2 << n, 2 << n))
        bent = decode_operator(w)
        disagreements += is_r_unitary(bent, tol=1e-9) != _orthogonal_oracle(bent)
    ok = disagreements == 0
    report_criterion(4, "R-unitarity predicate", ok, f"{disagreements} disagreements over 400 operators")
    assert ok


def test_05_partial_antiunitary_counterexample():
    k1 = make_kl(Language.from_labels(1, [1]))
    h, s = gate_to_rlinear(g("H", 1), 1), gate_to_rlinear(g("S", 1), 1)
    prod = star_all(k1, h, s, h, k1)
    ab = prod.A.conj().T @ prod.B
    y_half = np.array([[0, -1j], [1j, 0]]) / 2
    err = float(np.max(np.abs(ab - y_half)))
    fails = is_partial_antiunitary(prod) is None
    ok = err < 1e-12 and fails and is_r_unitary(prod)
    report_criterion(5, "partial-antiunitary counterexample", ok, f"|A^dag B - Y/2| = {err:.1e}, predicate rejects: {fails}")
    assert ok


def test_06_gate_set_identities():
    rep = verify_gate_identities()
    worst = max(rep.values())
    ok = worst < 1e-10 and "CS = G K CCK G K CCK" in rep
    report_criterion(6, "gate-set identities", ok, f"{len(rep)} relations, max {worst:.1e}")
    assert ok


def test_07_orthogonal_compiling(rng):
    start = time.perf_counter()
    worst_res, count_ok = 0.0, True
    for trial in range(100):
        d = (4, 8, 16)[trial % 3]
        w = random_orthogonal(d, rng)
        factors = two_level_decompose(w)
        count_ok &= len(factors) <= d * (d - 1) // 2
        worst_res = max(worst_res, np.max(np.abs(product_of_two_level(factors, d) - w)))
    worst_fac, bound_ok = 0.0, True
    for trial in range(30):
        n = trial % 3 + 1
        op = decode_operator(random_orthogonal(2 << n, rng))
        fac = factor_r_unitary(op)
        worst_fac = max(worst_fac, fac.residual(op))
        bound_ok &= fac.length <= length_bound(n)
    elapsed = time.perf_counter() - start
    ok = count_ok and bound_ok and worst_res < 1e-9 and worst_fac < 1e-8 and elapsed < 120
    report_criterion(
        7,
        "orthogonal compiling",
        ok,
        f"two-level residual {worst_res:.1e}, factorization residual {worst_fac:.1e}, {elapsed:.2f} s",
    )
    assert ok


def _wide_clifford(n, rng):
    gates = [g("H", q) for q in range(1, n + 1)]
    for _ in range(4 * n):
        kind = rng.choice(["S", "CK", "CX", "H"])
        if kind == "CX":
            a, b = rng.choice(n, 2, replace=False) + 1
            gates.append(g("CX", int(a), int(b)))
        else:
            gates.append(g(str(kind), int(rng.integers(1, n + 1))))
    return Circuit(n, gates)


def _per_shot_seconds(sampler, shots, repeats=5):
    best = math.inf
    for rep in range(repeats):
        rng = np.random.default_rng(rep)
        start = time.perf_counter()
        sampler.sample_bits(shots, rng)
        best = min(best, time.perf_counter() - start)
    return best / shots


def test_08_extended_gottesman_knill(rng):
    worst = 0.0
    for trial in range(500):
        n = trial % 6 + 1
        circ = random_circuit(n, int(rng.integers(0, 41)), rng, alphabet=RCLIFFORD_ALPHABET)
        expected = exact_distribution(run_logical(circ, zero_state(n)), cutoff=1e-15)
        worst = max(worst, _tvd(strong_probabilities(simulate(circ)), expected))
    sizes = [64, 256, 1024]
    per_shot = []
    for n in sizes:
        sampler = AffineSampler.from_tableau(simulate(_wide_clifford(n, rng)))
        sampler.sample_bits(4, np.random.default_rng(0))
        per_shot.append(_per_shot_seconds(sampler, 2000))
    slope = float(np.polyfit(np.log(sizes), np.log(per_shot), 1)[0])
    ok = worst < 1e-12 and slope <= 2.0
    timings = ", ".join(f"n={n}: {t * 1e6:.1f} us" for n, t in zip(sizes, per_shot))
    report_criterion(8, "extended Gottesman-Knill", ok, f"max TVD {worst:.1e}; per shot {timings}; slope {slope:.2f}")
    assert ok


def test_09_stabilizer_conjugation(rng):
    worst = 0.0
    for trial in range(200):
        n = trial % 6 + 1
        u = random_clifford_unitary(n, rng)
        gens = []
        for q in range(1, n + 1):
            lam, p = decompose_pauli(u @ PauliString.single(n, q, "Z").matrix() @ u.conj().T)
            gens.append(pauli_with_phase(lam, p))
        conj = _state_from_generators(conjugate_stabilizer_state(gens), rng)
        worst = max(worst, abs(1.0 - abs(np.vdot(conj, u[:, 0].conj()))))
    ok = worst < 1e-10
    report_criterion(9, "stabilizer conjugation", ok, f"max 1-|overlap| {worst:.1e}")
    assert ok


def test_10_hierarchy_facts():
    def phase(theta, n):
        return RLinearOp.linear(np.exp(1j * theta) * np.eye(1 << n))

    facts = {
        "K in level 1": hierarchy_level(RLinearOp.conjugation(1), kmax=1) == 1,
        "e^{i pi/4} I not in level 1": hierarchy_level(phase(math.pi / 4, 1), kmax=1) is None,
        "e^{i pi/8} I not in level 2": not is_r_clifford(phase(math.pi / 8, 1)),
        "CK in level 2": is_r_clifford(gate_to_rlinear(g("CK", 1), 2)),
        "T not in level 2": not is_r_clifford(gate_to_rlinear(g("T", 1), 1)),
        "CCZ at level 3": hierarchy_level(gate_to_rlinear(g("CCZ", 1, 2, 3), 3), kmax=3) == 3,
    }
    failed = [name for name, holds in facts.items() if not holds]
    ok = not failed
    report_criterion(10, "hierarchy facts", ok, f"{len(facts) - len(failed)}/{len(facts)} hold" + (f", failed {failed}" if failed else ""))
    assert ok


def test_11_symmetric_pauli_roots(rng):
    worst, roots_clifford = 0.0, True
    for trial in range(100):
        n = trial % 5 + 1
        while True:
            p = PauliString.from_label("".join(rng.choice(list("IXYZ"), size=n)))
            if p.y_count % 2 == 0:
                break
        u = symmetric_pauli_root(p)
        worst = max(worst, np.linalg.norm(u @ u.T - p.matrix(), 2))
        roots_clifford &= is_clifford_unitary(u)
    converse = 0
    for trial in range(100):
        u = random_clifford_unitary(trial % 4 + 1, rng)
        converse += decompose_pauli(u @ u.T) is not None
    ok = worst < 1e-10 and roots_clifford and converse == 100
    report_criterion(11, "symmetric Pauli roots", ok, f"max |UU^T - p| {worst:.1e}; {converse}/100 uu^T Pauli")
    assert ok


def test_12_tomography(rng):
    counts_ok = all(len(enumerate_observables(m)) == (4**m + 2**m) // 2 for m in range(1, 9))
    worst = 1.0
    for trial in range(100):
        m = trial % 5 + 1
        phi = rng.normal(size=1 << m)
        phi /= np.linalg.norm(phi)
        _, state = reconstruct(phi)
        worst = min(worst, abs(state @ phi))
    psi = random_state(2, rng)
    rho0 = density_from_expectations(expectations(encode_state(psi)), 3)
    rho1 = density_from_expectations(expectations(encode_state(np.exp(0.3j) * psi)), 3)
    gap = float(np.linalg.norm(rho0 - rho1))
    ok = counts_ok and worst > 1 - 1e-9 and gap > 0.01
    report_criterion(12, "tomography", ok, f"counts exact: {counts_ok}; min overlap {worst:.12f}; phase gap {gap:.3f}")
    assert ok


def test_13_determinism(tmp_path):
    circ = tmp_path / "ghz.circ"
    circ.write_text("qubits 4\nH 1\nCX 1 2\nCK 2\nS 3\nH 3\nCX 3 4\nH 4\n")
    outputs = []
    for engine in ("stabilizer", "dense"):
        argv = [sys.executable, "-m", "rebitsim", "sample", "--engine", engine, "--shots", "1000", "--seed", "7", str(circ)]
        runs = [subprocess.run(argv, capture_output=True, check=True).stdout for _ in range(2)]
        outputs.append(runs[0] == runs[1] and len(runs[0]) > 0)
    ok = all(outputs)
    report_criterion(13, "determinism", ok, f"byte-identical across processes (stabilizer, dense): {outputs}")
    assert ok
