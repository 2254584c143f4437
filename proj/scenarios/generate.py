#!/usr/bin/env python3
"""Regenerates the scenario files in this directory.

Field literals must be divergence-free to rounding, so they are computed here
(Leray projection, normalization, and the bilinear term of the manufactured
case) instead of being typed by hand.
"""
import cmath
import json
import math
import pathlib

HERE = pathlib.Path(__file__).resolve().parent


def canonical(k):
    for c in k:
        if c > 0:
            return True
        if c < 0:
            return False
    return False


def leray(field):
    out = {}
    for k, c in field.items():
        kk = sum(x * x for x in k)
        d = sum(c[i] * k[i] for i in range(3)) / kk
        out[k] = [c[i] - d * k[i] for i in range(3)]
    return out


def norm(field):
    return math.sqrt(2.0 * sum(abs(z) ** 2 for c in field.values() for z in c))


def scale(field, s):
    return {k: [s * z for z in c] for k, c in field.items()}


def full(field):
    out = {}
    for k, c in field.items():
        out[k] = c
        out[tuple(-x for x in k)] = [z.conjugate() for z in c]
    return out


def bilinear(u, v):
    fu, fv = full(u), full(v)
    acc = {}
    for m, um in fu.items():
        for l, vl in fv.items():
            k = tuple(m[i] + l[i] for i in range(3))
            if k == (0, 0, 0) or not canonical(k):
                continue
            s = 1j * sum(um[i] * l[i] for i in range(3))
            c = acc.setdefault(k, [0j, 0j, 0j])
            for i in range(3):
                c[i] += s * vl[i]
    return {k: c for k, c in leray(acc).items() if max(abs(z) for z in c) > 0}


def literal(field):
    return [
        {"k": list(k), "re": [z.real for z in c], "im": [z.imag for z in c]}
        for k, c in sorted(field.items())
    ]


def const(field):
    return {"degree_coeffs": [literal(field)]}


PHI_RAW = {
    (1, 1, 0): [0.3 + 0.1j, -0.2 + 0.4j, 0.5 - 0.2j],
    (1, 0, 1): [-0.1 + 0.3j, 0.6 + 0.0j, 0.2 + 0.2j],
    (0, 1, 1): [0.4 - 0.3j, 0.1 + 0.5j, -0.3 + 0.1j],
}
Q_RAW = {
    (1, 0, 0): [0j, 0.8 + 0.1j, -0.3 + 0.5j],
    (0, 1, 0): [0.4 - 0.2j, 0j, 0.6 + 0.3j],
    (0, 0, 1): [-0.5 + 0.2j, 0.3 + 0.7j, 0j],
}


def phi(amplitude):
    p = leray(PHI_RAW)
    return scale(p, amplitude / norm(p))


def q(s):
    return scale(Q_RAW, s)


def write(name, doc):
    (HERE / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


def rate_ladder(name, cutoff, extra=None):
    doc = {
        "name": name,
        "force": {"terms": [{"n": 1, **const(phi(0.05))}]},
        "initial": [],
        "expansion": {
            "N_max": 2,
            "fit_resonant": True,
            "resonant_window": [3.0, 8.0],
            "target_epsilon": 0.5,
            "norms": [{"alpha": 0.5, "sigma": 0.0}, {"alpha": 0.5, "sigma": 0.1}],
        },
        "solver": {"mode_cutoff": cutoff, "step": 1e-3, "t_end": 12.0, "sample_stride": 10},
        "output_dir": "out",
    }
    doc.update(extra or {})
    return doc


def main():
    qm = q(0.3)
    write("manufactured", {
        "name": "manufactured",
        "force": {"terms": [{"n": 2, **const(bilinear(qm, qm))}]},
        "initial": literal(qm),
        "expansion": {
            "N_max": 2,
            "resonant": {"1": literal(qm)},
            "target_epsilon": 0.5,
            "norms": [{"alpha": 0.0, "sigma": 0.0}, {"alpha": 0.5, "sigma": 0.0}],
            "rate_window": [2.0, 4.75],
        },
        "solver": {"mode_cutoff": 8, "step": 1e-3, "t_end": 5.0, "sample_stride": 10},
    })
    write("rate_ladder", rate_ladder("rate_ladder", 12))
    write("rate_ladder_m24", rate_ladder("rate_ladder_m24", 24))
    cert = {"alpha": 0.5, "delta": 0.5, "lambda": 1.0, "sigma": 0.0, "K": 2.0}
    write("certificate", {
        "name": "certificate",
        "force": {"terms": [{"n": 1, **const(phi(0.05))}]},
        "initial": literal(q(0.03)),
        "expansion": {"N_max": 1, "norms": [{"alpha": 0.5, "sigma": 0.0}]},
        "solver": {"mode_cutoff": 12, "step": 1e-3, "t_end": 8.0, "sample_stride": 10},
        "certificates": [cert],
        "energy_bound": {"M_star": 0.05, "kappa0": 1.0},
    })
    write("large_data", {
        "name": "large_data",
        "force": {},
        "initial": literal(q(2.0)),
        "expansion": {"N_max": 1, "norms": [{"alpha": 0.5, "sigma": 0.0}]},
        "solver": {"mode_cutoff": 8, "step": 1e-2, "t_end": 2.0, "sample_stride": 10},
        "certificates": [cert],
    })
    write("zero_force", {
        "name": "zero_force",
        "force": {},
        "initial": [],
        "expansion": {"N_max": 3, "norms": [{"alpha": 0.0, "sigma": 0.0}]},
        "solver": {"mode_cutoff": 4, "step": 1e-2, "t_end": 2.0, "sample_stride": 1},
    })
    write("wrong_xi", rate_ladder("wrong_xi", 12, None))
    doc = json.loads((HERE / "wrong_xi.json").read_text())
    doc["expansion"]["fit_resonant"] = False
    doc["expansion"]["resonant"] = {"2": literal(qm)}
    write("wrong_xi", doc)


if __name__ == "__main__":
    main()
