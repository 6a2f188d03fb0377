"""FastAPI service exposing the core operations as request/response calls.

Every endpoint is a pure computation on its request body, so the service is
safe to run with any number of workers; simulation endpoints take explicit
seeds and are reproducible.
"""

from __future__ import annotations

import io
import os

import numpy as np
from fastapi import FastAPI, HTTPException

from . import gallery
from .boundary import feller_classify
from .dirichlet import (
    energy_image,
    energy_triple,
    lift,
    membership_F,
    transience,
    triple_function_from_host,
)
from .exit_solver import exit_times_absorbing, hitting_probability, speed_from_exit_times
from .regularize import RegularizedPackage, ValidationError, image_regularization
from .scale import Triple, classify_endpoint_triple, validate_triple
from .schemas import (
    EnergyRequest,
    EnergyResponse,
    ExitRequest,
    ExitResponse,
    GalleryRequest,
    GalleryResponse,
    HealthResponse,
    RegularizeRequest,
    SimulateRequest,
    SimulateResponse,
    TripleModel,
    VerifyRequest,
)
from .simulate import chain_from_package, default_delta, project_unregularized, simulate_paths
from .verify import _window_chain, verify_suite

app = FastAPI(title="quasidiff", version="0.1.0",
              description="Regularization, classification, exact solves and "
                          "simulation for scale/measure triples")


def _num(x: float):
    if x == np.inf:
        return "inf"
    if x == -np.inf:
        return "-inf"
    return float(x)


def _jsonsafe(obj):
    """Convert numpy scalars and non-finite floats for JSON transport."""
    if isinstance(obj, dict):
        return {k: _jsonsafe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonsafe(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    return obj


def _parse(model: TripleModel) -> Triple:
    try:
        return model.to_triple()
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _regularize(triple: Triple) -> RegularizedPackage:
    try:
        return image_regularization(triple)
    except ValidationError as exc:
        raise HTTPException(status_code=422, detail={
            "message": "triple fails validation",
            "clauses": [{"name": c.name, "passed": c.passed, "witness": c.witness}
                        for c in exc.report.clauses]}) from exc


def package_document(package: RegularizedPackage) -> dict:
    m = package.measure
    return {
        "components": [[_num(a), _num(b)] for a, b in package.set.components],
        "l_in": package.set.l_in,
        "r_in": package.set.r_in,
        "gaps": [[a, b] for a, b in package.gaps],
        "measure": {
            "pieces": [[_num(a), _num(b), rho] for a, b, rho in m.pieces],
            "atoms": [[x, mass] for x, mass in m.atoms],
            "endpoint_masses": [_num(m.endpoint_mass_l), _num(m.endpoint_mass_r)],
        },
        "endpoints": {
            side: {
                "approachable": package.endpoint(side).approachable,
                "regular": package.endpoint(side).regular,
                "boundary": package.endpoint(side).boundary,
            } for side in ("l", "r")
        },
        "plateau_representatives": [
            [v, x] for v, x, kind in package.pullback.specials if kind == "plateau"],
    }


@app.get("/health", response_model=HealthResponse)
def health():
    return {"status": "ok"}


@app.post("/regularize")
def regularize_endpoint(req: RegularizeRequest):
    triple = _parse(req.triple)
    report = validate_triple(triple)
    if not report.passed:
        return {
            "valid": False,
            "clauses": [{"name": c.name, "passed": c.passed, "witness": c.witness}
                        for c in report.clauses],
        }
    package = _regularize(triple)
    doc = package_document(package)
    doc["valid"] = True
    return _jsonsafe(doc)


@app.post("/classify")
def classify_endpoint(req: RegularizeRequest):
    triple = _parse(req.triple)
    package = _regularize(triple)
    rep = feller_classify(package)
    out = {"conservative": rep.conservative, "transience": transience(package), "endpoints": {}}
    for side in ("l", "r"):
        ep = rep.endpoint(side)
        cls = classify_endpoint_triple(side, triple)
        out["endpoints"][side] = {
            "sigma": _num(ep.sigma), "lambda": _num(ep.lam),
            "feller_class": ep.feller_class, "accessible": ep.accessible,
            "included": ep.included, "approachable": cls.approachable,
            "regular": cls.regular, "boundary": cls.boundary,
        }
    return _jsonsafe(out)


@app.post("/energy", response_model=EnergyResponse)
def energy_endpoint(req: EnergyRequest):
    triple = _parse(req.triple)
    package = _regularize(triple)
    fn = req.function
    if fn.components is not None:
        tf = fn.components.to_triple_function()
        lf = lift(tf, package)
    elif fn.host is not None:
        lf = fn.host.to_lifted()
        tf = triple_function_from_host(lf, package)
    else:
        raise HTTPException(status_code=400, detail="function needs 'host' or 'components'")
    return _jsonsafe({
        "triple_energy": energy_triple(tf, triple.scale),
        "image_energy": energy_image(lf, package),
        "member_of_F": membership_F(lf, package),
    })


@app.post("/exit", response_model=ExitResponse)
def exit_endpoint(req: ExitRequest):
    triple = _parse(req.triple)
    package = _regularize(triple)
    delta = req.delta if req.delta is not None else default_delta(req.a, req.b)
    try:
        chain = _window_chain(package, req.a, req.b, delta)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    idx = chain.nearest_index(req.x)
    if chain.absorbing[idx]:
        raise HTTPException(status_code=400, detail="x coincides with a window edge")
    x_used = float(chain.states[idx])
    h = exit_times_absorbing(chain)
    states, masses = speed_from_exit_times(chain.states, h)
    return _jsonsafe({
        "hitting_prob": hitting_probability(x_used, req.a, req.b),
        "mean_exit_time": float(h[idx]),
        "recovered_atoms": {"states": states.tolist(), "masses": masses.tolist()},
        "x_used": x_used,
        "delta": delta,
    })


@app.post("/simulate", response_model=SimulateResponse)
def simulate_endpoint(req: SimulateRequest):
    triple = _parse(req.triple)
    package = _regularize(triple)
    span = [package.l_hat, package.r_hat]
    if not (np.isfinite(span[0]) and np.isfinite(span[1])):
        width = 4.0
        span = [req.x0 - width, req.x0 + width]
    delta = req.delta if req.delta is not None else default_delta(span[0], span[1])
    try:
        chain = chain_from_package(package, delta)
    except ValueError:
        chain = chain_from_package(package, delta, window=(span[0], span[1]))
    idx = chain.nearest_index(req.x0)
    if chain.absorbing[idx]:
        raise HTTPException(status_code=400, detail="x0 coincides with an absorbing boundary")
    x_used = float(chain.states[idx])
    threads = req.threads if req.threads > 0 else (os.cpu_count() or 1)
    paths = simulate_paths(chain, x_used, req.horizon, req.paths, req.seed, threads=threads)
    buf = io.StringIO()
    header = "path_id,t,state"
    if req.project:
        header += ",x"
        projected = [project_unregularized(p, package.pullback) for p in paths]
    buf.write(header + "\n")
    for p in paths:
        proj = projected[p.path_index] if req.project else None
        for i in range(len(p.times)):
            row = f"{p.path_index},{float(p.times[i])!r},{float(p.states[i])!r}"
            if proj is not None:
                row += f",{float(proj.states[i])!r}"
            buf.write(row + "\n")
    absorbed = [p for p in paths if p.absorbed_at is not None]
    summary = {
        "paths": req.paths,
        "seed": req.seed,
        "x0_used": x_used,
        "delta": delta,
        "horizon": req.horizon,
        "absorbed": len(absorbed),
        "absorption_counts": {
            str(v): sum(1 for p in absorbed if p.absorbed_at == v)
            for v in sorted({p.absorbed_at for p in absorbed})},
        "mean_lifetime": (float(np.mean([p.lifetime for p in absorbed])) if absorbed else None),
        "truncated": sum(1 for p in paths if p.truncated),
        "skip_free": True,
    }
    return {"csv": buf.getvalue(), "summary": _jsonsafe(summary)}


@app.post("/verify")
def verify_endpoint(req: VerifyRequest):
    triple = _parse(req.triple)
    package = _regularize(triple)
    threads = req.threads if req.threads > 0 else (os.cpu_count() or 1)
    try:
        report = verify_suite(package, req.suite, n_paths=req.paths, seed=req.seed,
                              threads=threads, delta=req.delta)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return _jsonsafe(report.to_dict())


@app.post("/gallery", response_model=GalleryResponse)
def gallery_endpoint(req: GalleryRequest):
    p = req.params
    try:
        if req.name == "snapping_out":
            triple = gallery.snapping_out(float(p.get("kappa", 2.0)))
        elif req.name == "random_walk":
            triple = gallery.random_walk(p["levels"], p["masses"], p=int(p.get("p", 0)))
        elif req.name == "birth_death":
            model = gallery.birth_death(p["birth"], p["death"], q_max=int(p.get("q_max", 40)))
            doc = TripleModel.from_triple(model.triple).model_dump()
            return {"triple": doc, "uniqueness": model.uniqueness.to_dict()}
        elif req.name == "cantor":
            triple = gallery.cantor_examples(int(p.get("depth", 1)),
                                             p.get("variant", "timechange"))
        elif req.name == "regular_diffusion":
            triple = gallery.brownian_motion(
                float(p.get("l", -np.inf)) if p.get("l") != "-inf" else -np.inf,
                float(p.get("r", np.inf)) if p.get("r") != "inf" else np.inf)
        else:
            raise HTTPException(status_code=400, detail=f"unknown gallery name {req.name!r}")
    except (KeyError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return {"triple": TripleModel.from_triple(triple).model_dump()}
