#!/usr/bin/env python3
"""Independently solve an exported LP file with HiGHS (scipy.optimize.milp).

Parses the canonical LP dialect written by the `export` subcommand
(Minimize / Subject To / Bounds / Binaries / End) and reports the optimum,
so the built-in branch-and-bound can be cross-checked against a third-party
solver.

Usage: tools/verify_lp.py model.lp [expected_optimum]
"""
import re
import sys

import numpy as np
from scipy import optimize, sparse


def parse_lp(text):
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    section = None
    objective = {}
    constraints = []  # (terms, sense, rhs)
    bounds = {}
    integers = set()
    term_re = re.compile(r"([+-])?\s*(\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)?\s*([A-Za-z_][\w]*)")

    def parse_terms(expr):
        terms = {}
        for sign, coef, name in term_re.findall(expr):
            c = float(coef) if coef else 1.0
            if sign == "-":
                c = -c
            terms[name] = terms.get(name, 0.0) + c
        return terms

    for ln in lines:
        low = ln.lower()
        if low == "minimize":
            section = "obj"
            continue
        if low == "subject to":
            section = "cons"
            continue
        if low == "bounds":
            section = "bounds"
            continue
        if low in ("binaries", "generals"):
            section = "int"
            continue
        if low == "end":
            break
        if section == "obj":
            objective = parse_terms(ln.split(":", 1)[1])
        elif section == "cons":
            body = ln.split(":", 1)[1]
            m = re.search(r"(<=|>=|=)", body)
            sense = m.group(1)
            lhs, rhs = body[: m.start()], body[m.end():]
            constraints.append((parse_terms(lhs), sense, float(rhs)))
        elif section == "bounds":
            if "<=" in ln:
                lo, name, hi = re.match(
                    r"([\d.eE+-]+)\s*<=\s*(\w+)\s*<=\s*([\d.eE+-]+)", ln).groups()
                bounds[name] = (float(lo), float(hi))
            else:
                name, val = re.match(r"(\w+)\s*=\s*([\d.eE+-]+)", ln).groups()
                bounds[name] = (float(val), float(val))
        elif section == "int":
            integers.add(ln)
    return objective, constraints, bounds, integers


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    text = open(sys.argv[1]).read()
    objective, constraints, bounds, integers = parse_lp(text)

    names = sorted(bounds)
    index = {n: i for i, n in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    for name, coef in objective.items():
        c[index[name]] = coef

    rows, lo, hi = [], [], []
    for terms, sense, rhs in constraints:
        row = np.zeros(n)
        for name, coef in terms.items():
            row[index[name]] = coef
        rows.append(row)
        if sense == "<=":
            lo.append(-np.inf)
            hi.append(rhs)
        elif sense == ">=":
            lo.append(rhs)
            hi.append(np.inf)
        else:
            lo.append(rhs)
            hi.append(rhs)

    lc = optimize.LinearConstraint(sparse.csr_matrix(np.array(rows)), lo, hi)
    vlo = np.array([bounds[nm][0] for nm in names])
    vhi = np.array([bounds[nm][1] for nm in names])
    integrality = np.array([1 if nm in integers else 0 for nm in names])

    res = optimize.milp(c, constraints=lc,
                        bounds=optimize.Bounds(vlo, vhi),
                        integrality=integrality)
    if not res.success:
        print(f"solver failed: {res.message}")
        return 1
    print(f"HiGHS optimum: {res.fun:.6f}  ({n} variables, {len(constraints)} constraints)")
    if len(sys.argv) > 2:
        expected = float(sys.argv[2])
        if abs(res.fun - expected) > 1e-6:
            print(f"MISMATCH: expected {expected}")
            return 1
        print(f"matches expected optimum {expected}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
