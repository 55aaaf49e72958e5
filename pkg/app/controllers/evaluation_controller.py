"""
Evaluation controller: system validation, kernel values and bound constants.
"""
import logging

from fastapi import APIRouter, HTTPException, Query

from app.models.api_models import (
    BoundsRequest,
    BoundsResponse,
    KernelRequest,
    KernelResponse,
    OmegaRequest,
    OmegaResponse,
)
from app.models.system_models import SpectralResponse, SystemDocument
from app.numerics.bounds import BoundConstants, bound_table, omega_bound
from app.numerics.errors import OUKitError, describe_error
from app.numerics.kernel import KernelQuery, heat_kernel
from app.numerics.linalg import OUSystem, spectral_quantities

logger = logging.getLogger(__name__)

router = APIRouter()


def _pairs(values):
    return [[float(z.real), float(z.imag)] for z in values]


def _system(document: SystemDocument) -> OUSystem:
    try:
        return document.to_system()
    except OUKitError as e:
        raise HTTPException(status_code=422, detail=f"Invalid system: {describe_error(e)}")


def _unprocessable(action: str, e: Exception) -> HTTPException:
    if isinstance(e, (OUKitError, ValueError)):
        return HTTPException(status_code=422, detail=f"{action} failed: {describe_error(e)}")
    logger.exception(f"{action} failed")
    return HTTPException(status_code=500, detail=f"{action} failed: {str(e)}")


@router.post("/systems/validate")
async def validate_system_document(document: SystemDocument) -> dict:
    """
    Validate a system and return it with the verified transformation matrix Y.
    """
    sys = _system(document)
    logger.info(f"Validated system {sys.name}: d={sys.d}, N={sys.N}")
    return {"valid": True, "system": SystemDocument.from_system(sys).model_dump()}


@router.post("/systems/spectral", response_model=SpectralResponse)
async def system_spectral_quantities(
    document: SystemDocument,
    eta: float = Query(default=0.0, ge=0.0),
    p: float = Query(default=1.0, ge=1.0),
) -> SpectralResponse:
    sys = _system(document)
    try:
        sq = spectral_quantities(sys, eta=eta, p=p)
    except Exception as e:
        raise _unprocessable("Spectral quantities", e)
    return SpectralResponse(
        name=sys.name,
        d=sys.d,
        N=sys.N,
        lambdaA=_pairs(sys.lambdaA),
        lambdaB=_pairs(sys.lambdaB),
        a_min=sq.a_min,
        a_max=sq.a_max,
        a0=sq.a0,
        b0=sq.b0,
        kappa=sq.kappa,
        a1=sq.a1,
        nu=sq.nu,
    )


@router.post("/kernel", response_model=KernelResponse)
async def evaluate_kernel(request: KernelRequest) -> KernelResponse:
    """
    Heat kernel H(x, xi, t) at one pair of points.
    """
    sys = _system(request.system)
    if len(request.x) != sys.d or len(request.xi) != sys.d:
        raise HTTPException(status_code=422, detail=f"Points must have {sys.d} coordinates")
    try:
        matrix = heat_kernel(KernelQuery(sys=sys, t=request.t, x=request.x, xi=request.xi))
    except Exception as e:
        raise _unprocessable("Kernel evaluation", e)
    return KernelResponse(system=sys.name, t=request.t, matrix=[_pairs(row) for row in matrix])


@router.post("/bounds", response_model=BoundsResponse)
async def evaluate_bounds(request: BoundsRequest) -> BoundsResponse:
    """
    Bound constants C1..C6 at each requested t, plus the time-integrated C7 and C8.
    """
    sys = _system(request.system)
    try:
        sq = spectral_quantities(sys, eta=request.eta, p=request.p)
        constants = BoundConstants(sq=sq, C_theta=request.C_theta, vartheta=request.vartheta)
        rows = bound_table(sq, request.t, C_theta=request.C_theta)
        C7, C8 = constants.C7, constants.C8
    except Exception as e:
        raise _unprocessable("Bound evaluation", e)
    return BoundsResponse(columns=["t", "C1", "C2", "C3", "C4", "C5", "C6"], rows=rows, C7=C7, C8=C8)


@router.post("/omega", response_model=OmegaResponse)
async def evaluate_omega(request: OmegaRequest) -> OmegaResponse:
    """
    Growth bound (omega, M) with ||T(t)|| <= M e^{omega t}.
    """
    sys = _system(request.system)
    try:
        sq = spectral_quantities(sys, eta=request.eta, p=request.p)
        result = omega_bound(sq, request.mode, p=request.p, C_theta=request.C_theta, epsilon=request.epsilon)
    except Exception as e:
        raise _unprocessable("Omega bound", e)
    return OmegaResponse(**result)
