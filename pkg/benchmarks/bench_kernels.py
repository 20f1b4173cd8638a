"""Time the numba kernels against the numpy fallback.

Usage: ``python benchmarks/bench_kernels.py [--repeat N]``

The first compiled call (JIT warm-up, or loading from the numba cache) is
excluded.  Both paths are also compared for agreement.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from rydlat import _kernels
from rydlat.blockade import mixing_hamiltonian, synth_manifold
from rydlat.config import default_config, parse_config_dict
from rydlat.params import TWO_PI
from rydlat.quantum import jump_operators, pair_hamiltonian


def _with_numba(flag: bool, fn):
    saved = _kernels._DISABLED
    _kernels._DISABLED = not flag
    try:
        return fn()
    finally:
        _kernels._DISABLED = saved


def _bench(label: str, fn, repeat: int, number: int) -> dict:
    rows = {}
    for name, flag in (("numba", True), ("numpy", False)):
        if flag and not _kernels.NUMBA_AVAILABLE:
            continue
        _with_numba(flag, fn)
        t = min(timeit.repeat(lambda: _with_numba(flag, fn), repeat=repeat, number=number)) / number
        rows[name] = t
    ref = rows.get("numba")
    for name, t in rows.items():
        speed = f"  x{rows['numpy'] / t:.2f} vs numpy" if ref is not None and name == "numba" else ""
        print(f"{label:<34s} {name:<6s} {t * 1e3:10.3f} ms{speed}")
    return rows


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    p = parse_config_dict(default_config()).params
    h = pair_hamiltonian(p, p.omega2c, 1.1 * p.omega2c, p.v_max)
    jumps = jump_operators(p.gamma_p, p.gamma_e)
    a = _with_numba(True, lambda: _kernels.lindblad(h, jumps))
    b = _with_numba(False, lambda: _kernels.lindblad(h, jumps))
    print(f"lindblad agreement: max |numba - numpy| = {np.abs(a - b).max():.2e}")
    _bench("lindblad (9-level pair, 81x81)", lambda: _kernels.lindblad(h, jumps), args.repeat, 200)

    m = synth_manifold(7, 3800, TWO_PI * 1e9, TWO_PI * 3e-9, 0.99)
    hm = mixing_hamiltonian(m, 2e-6, TWO_PI * 1e5).tocsr().astype(complex)
    psi = np.zeros(hm.shape[0], dtype=complex)
    psi[0] = 1.0
    a = _with_numba(True, lambda: _kernels.rk4(hm, psi, 1e-13, 100))
    b = _with_numba(False, lambda: _kernels.rk4(hm, psi, 1e-13, 100))
    print(f"rk4 agreement: max |numba - numpy| = {np.abs(a - b).max():.2e}")
    _bench(f"rk4 (CSR {hm.shape[0]} states, 100 steps)", lambda: _kernels.rk4(hm, psi, 1e-13, 100), args.repeat, 3)


if __name__ == "__main__":
    main()
