#!/usr/bin/env python3
"""Solve an MPS file (with optional QCMATRIX sections) using SCIP.

Usage: scip_solve.py INPUT.mps OUTPUT.sol TIME_LIMIT_S REL_GAP

The output file uses the plain text layout read by the Rust process backend:

    status <optimal|feasible|infeasible|unbounded|time_limit|error>
    objective <value>
    solve_time <seconds>
    <variable name> <value>
    ...
"""
import os
import sys
import time


def write(path, status, objective=None, solve_time=0.0, values=None, message=None):
    with open(path, "w") as out:
        out.write("status %s\n" % status)
        if message:
            out.write("message %s\n" % message.replace("\n", " "))
        if objective is not None:
            out.write("objective %s\n" % repr(float(objective)))
        out.write("solve_time %s\n" % repr(float(solve_time)))
        for name, value in values or []:
            out.write("%s %s\n" % (name, repr(float(value))))


def main(argv):
    if len(argv) != 5:
        sys.stderr.write(__doc__)
        return 1
    inp, outp, time_limit, gap = argv[1], argv[2], float(argv[3]), float(argv[4])
    try:
        from pyscipopt import Model
    except ImportError as exc:
        write(outp, "error", message="pyscipopt unavailable: %s" % exc)
        return 2

    # METIS ordering in the bundled MUMPS corrupts the heap on larger QCPs
    optfile = os.path.join(os.path.dirname(os.path.abspath(outp)), "ipopt.opt")
    with open(optfile, "w") as opt:
        opt.write("mumps_pivot_order 0\n")

    start = time.time()
    model = None
    for feastol in (1e-6, 1e-5):
        model = Model()
        model.hideOutput()
        try:
            model.readProblem(inp)
        except Exception as exc:
            write(outp, "error", message="cannot read %s: %s" % (inp, exc))
            return 2
        model.setParam("limits/time", max(1.0, time_limit - (time.time() - start)))
        model.setParam("limits/gap", gap)
        model.setParam("numerics/feastol", feastol)
        model.setParam("randomization/randomseedshift", 0)
        model.setParam("nlpi/ipopt/optfile", optfile)
        try:
            model.optimize()
            break
        except Exception as exc:
            sys.stderr.write("scip failed with feastol %g: %s\n" % (feastol, exc))
    else:
        write(outp, "error", solve_time=time.time() - start, message="scip numerical failure")
        return 0
    elapsed = time.time() - start

    raw = model.getStatus()
    has_sol = model.getNSols() > 0
    mapping = {
        "optimal": "optimal",
        "gaplimit": "optimal",
        "infeasible": "infeasible",
        "unbounded": "unbounded",
        "inforunbd": "infeasible",
        "timelimit": "time_limit",
    }
    status = mapping.get(raw, "feasible" if has_sol else "error")
    if status in ("optimal", "time_limit", "feasible") and has_sol:
        sol = model.getBestSol()
        values = [(v.name, model.getSolVal(sol, v)) for v in model.getVars(transformed=False)]
        write(outp, status, model.getSolObjVal(sol, original=True), elapsed, values)
    else:
        write(outp, status, solve_time=elapsed, message="scip status %s" % raw)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
