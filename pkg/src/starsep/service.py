"""Service layer: pydantic request/response models and a FastAPI app.

The handlers are plain functions over the models, so the CLI can call them
in-process without a running server; the FastAPI app mounts the same
handlers under /v1 for long-running, multi-client use.  Geometry caches
are immutable once built and are shared between requests via a small
keyed cache.

Serialization conventions (byte-deterministic for fixed config and seed):
monomials render as sorted products `z1^a*zbar1^b*...*eta1^c*etabar1^d`;
coefficients as a lowest-terms fraction string `"p/q"` (integers without
the denominator), or a `[re, im]` pair of such strings when complex; each
nu-component appears both as a {monomial: coefficient} map ("series") and
as a canonical polynomial string ("text").
"""

from __future__ import annotations

import threading
from fractions import Fraction
from typing import Any, Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, model_validator

from .exprparse import ExpressionError, ast_to_jet, parse_expression
from .geometry import GeometryCache
from .jets import (
    BUILTIN_POTENTIALS,
    GaussRational,
    Jet,
    MAX_ORDER,
    builtin_potential,
    monomial_text,
    render_terms,
)
from .star import star, tensor_T
from .symbols import Symbol, left_mult_symbol
from .verify import (
    VerificationReport,
    verify_algebraic_identities,
    verify_cross_checks,
    verify_star_laws,
)

# ------------------------------------------------------------------ requests


class JobConfig(BaseModel):
    """Common job parameters; phi_order defaults to jet_order + 2*nu_order + 4."""

    n: int = Field(default=1, ge=1, le=8)
    potential: str = "flat"
    nu_order: int = Field(default=2, ge=0)
    jet_order: int = Field(default=2, ge=2)
    phi_order: int | None = Field(default=None, ge=2)
    seed: int = 7

    @model_validator(mode="after")
    def _check_orders(self) -> "JobConfig":
        if self.resolved_phi_order() > MAX_ORDER:
            raise ValueError(
                f"phi order {self.resolved_phi_order()} exceeds the supported maximum {MAX_ORDER}"
            )
        return self

    def resolved_phi_order(self) -> int:
        if self.phi_order is not None:
            return self.phi_order
        return self.jet_order + 2 * self.nu_order + 4


class StarRequest(JobConfig):
    f: str
    g: str


class LSymbolRequest(JobConfig):
    f: str


class TensorTRequest(JobConfig):
    at_origin: bool = False


class GeomRequest(JobConfig):
    pass


class VerifyRequest(JobConfig):
    f: str | None = None
    g: str | None = None
    h: str | None = None


# ------------------------------------------------------------------ responses


class SeriesResponse(BaseModel):
    meta: dict[str, Any]
    series: dict[str, dict[str, Any]]
    text: dict[str, str]


class GeomResponse(BaseModel):
    meta: dict[str, Any]
    tensors: dict[str, dict[str, Any]]


class CheckModel(BaseModel):
    name: str
    status: Literal["pass", "fail"]
    witness: str = ""


class VerifyResponse(BaseModel):
    passed: bool
    config: dict[str, Any]
    checks: list[CheckModel]


# ------------------------------------------------------------------ serialization


def coeff_payload(c: GaussRational):
    if c.is_real:
        return str(c.re)
    return [str(c.re), str(c.im)]


def jet_payload(jet: Jet) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for _, key, (re, im) in jet._sorted_items():
        coeff = GaussRational(Fraction(re, jet.den), Fraction(im, jet.den))
        out[monomial_text(key, jet.n)] = coeff_payload(coeff)
    return out


def symbol_payload(symbol: Symbol) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for base, fiber, coeff in symbol.flattened():
        out[monomial_text(base, symbol.n, fiber)] = coeff_payload(coeff)
    return out


def symbol_origin_payload(symbol: Symbol) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for (z, e, b), jet in symbol.sorted_terms():
        c = jet.constant_term()
        if not c.is_zero:
            out[monomial_text(0, symbol.n, (z, e, b))] = coeff_payload(c)
    return out


def series_response(meta: dict, components, payload_fn, text_fn) -> SeriesResponse:
    series = {str(r): payload_fn(c) for r, c in enumerate(components)}
    text = {str(r): text_fn(c) for r, c in enumerate(components)}
    return SeriesResponse(meta=meta, series=series, text=text)


# ------------------------------------------------------------------ cache plumbing

_CACHE_LOCK = threading.Lock()
_CACHES: dict[tuple, GeometryCache] = {}
_CACHE_LIMIT = 16


def _potential_jet(potential: str, n: int, order: int) -> Jet:
    if potential in BUILTIN_POTENTIALS:
        return builtin_potential(potential, n, order)
    ast = parse_expression(potential, n)
    return ast_to_jet(ast, n, order)


def geometry_for(cfg: JobConfig) -> GeometryCache:
    phi_order = cfg.resolved_phi_order()
    work_order = cfg.jet_order + 2 * cfg.nu_order
    chain_margin = max(4, cfg.nu_order)
    key = (cfg.potential, cfg.n, phi_order, work_order, chain_margin)
    with _CACHE_LOCK:
        cached = _CACHES.get(key)
    if cached is not None:
        return cached
    phi = _potential_jet(cfg.potential, cfg.n, phi_order)
    cache = GeometryCache(
        phi,
        work_order=work_order,
        chain_margin=chain_margin,
        phi_source=lambda o: _potential_jet(cfg.potential, cfg.n, o),
    )
    with _CACHE_LOCK:
        if len(_CACHES) >= _CACHE_LIMIT:
            _CACHES.pop(next(iter(_CACHES)))
        _CACHES[key] = cache
    return cache


def _meta(cfg: JobConfig) -> dict[str, Any]:
    return {
        "potential": cfg.potential,
        "n": cfg.n,
        "nu_order": cfg.nu_order,
        "jet_order": cfg.jet_order,
        "phi_order": cfg.resolved_phi_order(),
        "base_point": "origin",
    }


# ------------------------------------------------------------------ handlers


def run_star(req: StarRequest) -> SeriesResponse:
    G = geometry_for(req)
    f = ast_to_jet(parse_expression(req.f, req.n), req.n, G.phi.order)
    g = ast_to_jet(parse_expression(req.g, req.n), req.n, G.phi.order)
    result = star(G, f, g, req.nu_order, out_order=req.jet_order)
    return series_response(
        {**_meta(req), "f": req.f, "g": req.g},
        result.series.components,
        jet_payload,
        lambda jet: jet.to_text(),
    )


def run_lsymbol(req: LSymbolRequest) -> SeriesResponse:
    G = geometry_for(req)
    f = ast_to_jet(parse_expression(req.f, req.n), req.n, G.phi.order)
    F = left_mult_symbol(G, f, req.nu_order, out_order=req.jet_order)
    components = [c.truncated(req.jet_order) for c in F.components]
    return series_response(
        {**_meta(req), "f": req.f},
        components,
        symbol_payload,
        lambda s: s.to_text(),
    )


def run_tensor_t(req: TensorTRequest) -> SeriesResponse:
    G = geometry_for(req)
    T = tensor_T(G, req.nu_order, out_order=req.jet_order)
    if req.at_origin:
        payload_fn = symbol_origin_payload

        def text_fn(s: Symbol) -> str:
            parts = []
            for fiber, jet in s.sorted_terms():
                coeff = jet.constant_term()
                if not coeff.is_zero:
                    parts.append((coeff, monomial_text(0, s.n, fiber)))
            return render_terms(parts)

    else:
        payload_fn = symbol_payload

        def text_fn(s: Symbol) -> str:
            return s.to_text()

    return series_response(
        {**_meta(req), "at_origin": req.at_origin},
        T.series.components,
        payload_fn,
        text_fn,
    )


def run_geom(req: GeomRequest) -> GeomResponse:
    G = geometry_for(req)
    n = req.n
    M = req.jet_order
    tensors: dict[str, dict[str, Any]] = {}
    tensors["g_low"] = {
        f"{k},{l}": jet_payload(G.g_low(k, l).truncated(M))
        for k in range(1, n + 1)
        for l in range(1, n + 1)
    }
    tensors["g_up"] = {
        f"{l},{k}": jet_payload(G.g_up(l, k).truncated(M))
        for l in range(1, n + 1)
        for k in range(1, n + 1)
    }
    tensors["christoffel_bar"] = {
        f"{t},{l},{q}": jet_payload(G.christoffel_bar(t, l, q).truncated(M))
        for t in range(1, n + 1)
        for l in range(1, n + 1)
        for q in range(1, n + 1)
    }
    tensors["curvature_low"] = {
        f"{k},{p},{l},{q}": jet_payload(G.curvature_low(k, p, l, q).truncated(M))
        for k in range(1, n + 1)
        for p in range(1, n + 1)
        for l in range(1, n + 1)
        for q in range(1, n + 1)
    }
    tensors["rho_2_2"] = symbol_payload(G.rho(2, 2).truncated(M))
    tensors["gamma"] = symbol_payload(G.gamma().truncated(M))
    return GeomResponse(meta=_meta(req), tensors=tensors)


def run_verify(req: VerifyRequest) -> VerifyResponse:
    G = geometry_for(req)
    functions = None
    if req.f and req.g and req.h:
        functions = tuple(
            ast_to_jet(parse_expression(text, req.n), req.n, G.phi.order)
            for text in (req.f, req.g, req.h)
        )
    report = VerificationReport.merge(
        verify_algebraic_identities(G, req.seed),
        verify_star_laws(G, req.nu_order, req.seed, functions=functions),
        verify_cross_checks(G, req.nu_order, req.seed),
    )
    config = {**_meta(req), "seed": req.seed}
    return VerifyResponse(
        passed=report.passed,
        config=config,
        checks=[
            CheckModel(name=c.name, status=c.status, witness=c.witness)
            for c in report.checks
        ],
    )


# ------------------------------------------------------------------ FastAPI app


def create_app() -> FastAPI:
    app = FastAPI(
        title="starsep",
        description="Exact star products with separation of variables on pseudo-Kähler charts",
        version="0.1.0",
    )

    def guarded(handler, request):
        try:
            return handler(request)
        except (ExpressionError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.post("/v1/star", response_model=SeriesResponse)
    def star_endpoint(req: StarRequest) -> SeriesResponse:
        return guarded(run_star, req)

    @app.post("/v1/lsymbol", response_model=SeriesResponse)
    def lsymbol_endpoint(req: LSymbolRequest) -> SeriesResponse:
        return guarded(run_lsymbol, req)

    @app.post("/v1/tensor-t", response_model=SeriesResponse)
    def tensor_t_endpoint(req: TensorTRequest) -> SeriesResponse:
        return guarded(run_tensor_t, req)

    @app.post("/v1/geom", response_model=GeomResponse)
    def geom_endpoint(req: GeomRequest) -> GeomResponse:
        return guarded(run_geom, req)

    @app.post("/v1/verify", response_model=VerifyResponse)
    def verify_endpoint(req: VerifyRequest) -> VerifyResponse:
        return guarded(run_verify, req)

    return app


app = create_app()
