"""HTTP service exposing region computation, comparison and simulation.

All numeric work is delegated to the library modules; handlers only
translate payloads and errors.  Run standalone with

    uvicorn cicregions.service.app:app

or construct a fresh application object via :func:`create_app` (used by
the CLI's in-process transport and by the tests).
"""

import logging

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import InstanceConfig
from ..errors import CicError, ConsistencyError, GuardError
from ..instances import random_instance
from ..polytope import polygon_contains, project_region
from ..probability import compose
from ..regions import (
    RateVector,
    build_system,
    constraint_gap,
    exponent_identity_check,
    system_to_dict,
)
from ..simulate import SimConfig, run_trials, sweep_rp2c
from .schemas import (
    CompareBatchRequest,
    CompareRequest,
    IdentitiesRequest,
    InstancePayload,
    RandomSpec,
    RegionRequest,
    SimulateRequest,
    SweepRequest,
)

logger = logging.getLogger("cicregions.service")


def _instance(payload: InstancePayload) -> InstanceConfig:
    return InstanceConfig.from_dict(payload.model_dump(exclude_none=True))


def _random_instances(spec: RandomSpec):
    for i in range(spec.count):
        rng = np.random.default_rng([spec.seed, i])
        yield i, random_instance(rng, q_card=spec.q_card)


def _compare_one(config: InstanceConfig) -> dict:
    joint = compose(config.channel, config.aux)
    dmt = build_system("dmt", joint)
    corrected = build_system("corrected", joint)
    dmt_poly = project_region(dmt)
    corr_poly = project_region(corrected)
    return {
        "dmt_polygon": dmt_poly.to_dict(),
        "dmt_area": dmt_poly.area,
        "corrected_polygon": corr_poly.to_dict(),
        "corrected_area": corr_poly.area,
        "inclusion": polygon_contains(corr_poly, dmt_poly),
        "gaps": constraint_gap(dmt, corrected),
    }


def create_app() -> FastAPI:
    app = FastAPI(title="cicregions", version=__version__)

    @app.exception_handler(GuardError)
    async def _guard(request, exc: GuardError):
        return JSONResponse(status_code=400,
                            content={"error": str(exc), "budgets": exc.budgets})

    @app.exception_handler(ConsistencyError)
    async def _consistency(request, exc: ConsistencyError):
        logger.error("internal consistency failure: %s", exc)
        return JSONResponse(status_code=500, content={"error": str(exc)})

    @app.exception_handler(CicError)
    async def _input(request, exc: CicError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/region")
    def region(req: RegionRequest):
        config = _instance(req.instance)
        joint = compose(config.channel, config.aux)
        system = build_system(req.system, joint)
        poly = project_region(system)
        return {
            "instance_name": config.name,
            "constraints": system_to_dict(system),
            "polygon": poly.to_dict(),
            "area": poly.area,
        }

    @app.post("/v1/compare")
    def compare(req: CompareRequest):
        config = _instance(req.instance)
        out = _compare_one(config)
        out["instance_name"] = config.name
        return out

    @app.post("/v1/compare/batch")
    def compare_batch(req: CompareBatchRequest):
        results = []
        failures = []
        for i, config in _random_instances(req.random):
            row = _compare_one(config)
            results.append({
                "index": i,
                "inclusion": row["inclusion"],
                "dmt_area": row["dmt_area"],
                "corrected_area": row["corrected_area"],
            })
            if not row["inclusion"]:
                failures.append(i)
        logger.info("compared %d random instances, %d inclusion failures",
                    req.random.count, len(failures))
        return {
            "count": req.random.count,
            "all_included": not failures,
            "failures": failures,
            "results": results,
        }

    @app.post("/v1/identities")
    def identities(req: IdentitiesRequest):
        if req.instance is not None:
            config = _instance(req.instance)
            joint = compose(config.channel, config.aux)
            report = exponent_identity_check(joint)
            return {
                "instance_name": config.name,
                "all_ok": report.all_ok,
                "max_residual": report.max_residual,
                "entries": [
                    {
                        "event": e.event,
                        "constraint_id": e.constraint_id,
                        "exponent_terms": list(e.exponent_terms),
                        "exponent_bits": e.exponent_bits,
                        "bound_bits": e.bound_bits,
                        "residual": e.residual,
                        "note": e.note,
                    }
                    for e in report.entries
                ],
            }
        worst = -1.0
        worst_index = -1
        for i, config in _random_instances(req.random):
            joint = compose(config.channel, config.aux)
            report = exponent_identity_check(joint)
            if report.max_residual > worst:
                worst = report.max_residual
                worst_index = i
        return {
            "count": req.random.count,
            "all_ok": worst <= 1e-9,
            "max_residual": worst,
            "worst_index": worst_index,
        }

    @app.post("/v1/simulate")
    def simulate(req: SimulateRequest):
        config = _instance(req.instance)
        rates = RateVector(**req.rates.model_dump())
        sim = SimConfig(n=req.n, rates=rates, eps_typ=req.eps_typ,
                        trials=req.trials, master_seed=req.master_seed)
        report = run_trials(config.channel, config.aux, sim, jobs=req.jobs)
        out = report.to_dict()
        out["instance_name"] = config.name
        return out

    @app.post("/v1/simulate/sweep")
    def simulate_sweep(req: SweepRequest):
        config = _instance(req.instance)
        report = sweep_rp2c(config.channel, config.aux, req.n, req.rp2c_values,
                            trials=req.trials, master_seed=req.master_seed,
                            eps_typ=req.eps_typ)
        out = report.to_dict()
        out["instance_name"] = config.name
        return out

    return app


app = create_app()
