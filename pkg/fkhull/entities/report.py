"""Report schemas written next to every run.

Every ``*_ok`` flag is derived from numbers stored in the same model by a
root validator, so a report loaded back recomputes identical flags.
"""

from typing import Any, Dict, List, Optional, Set, Tuple

from pydantic import BaseModel, Field, root_validator


class ConditionNumbers(BaseModel):
    n_plus: float
    n_minus: float
    c: float
    l_mean: float = 1.0


class IterationRecord(BaseModel):
    iteration: int
    rho: float
    eps: float
    delta_norm: float = 0.0
    lam: float = 0.0
    n_plus: float = 1.0
    n_minus: float = 1.0
    c: float = 1.0
    truncation_loss: float = 0.0


class DiophantineReport(BaseModel):
    style: str
    tau: float
    nu: float
    empirical_nu: float
    passed: bool = False
    witness: Optional[str] = None
    witness_divisor: Optional[float] = None
    min_divisor: float
    min_divisor_index: str
    set_size: int

    @root_validator(skip_on_failure=True)
    def _passed(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        values["passed"] = values["empirical_nu"] >= values["nu"]
        return values


class LinearizedBounds(BaseModel):
    beta: float
    t_bound: float
    u_bound: float
    n_minus: float
    decay: Dict[int, float] = Field(default_factory=dict)
    contraction: Optional[float] = None
    beta_product: float = 0.0
    u_product: float = 0.0
    h5_beta_ok: bool = False
    h5_u_ok: bool = False
    h5_ok: bool = False

    @root_validator(skip_on_failure=True)
    def _products(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        n_minus_sq = values["n_minus"] ** 2
        values["beta_product"] = n_minus_sq * values["t_bound"] * values["beta"]
        values["u_product"] = n_minus_sq * values["u_bound"] * values["t_bound"]
        values["h5_beta_ok"] = values["beta_product"] < 0.5
        values["h5_u_ok"] = values["u_product"] < 0.5
        values["h5_ok"] = values["h5_beta_ok"] and values["h5_u_ok"]
        return values


class VanishingReport(BaseModel):
    applicable: bool
    lam: float
    tol: float
    passed: bool = False

    @root_validator(skip_on_failure=True)
    def _passed(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        values["passed"] = abs(values["lam"]) <= values["tol"]
        return values


class UniquenessReport(BaseModel):
    scale: float
    converged: bool
    distance: float
    lambda_distance: float
    tol: float
    agree: bool = False

    @root_validator(skip_on_failure=True)
    def _agree(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        values["agree"] = values["converged"] and max(values["distance"], values["lambda_distance"]) <= values["tol"]
        return values


class OracleReport(BaseModel):
    p: int
    q: int
    dense_distance: Optional[float] = None
    dense_lambda: Optional[float] = None
    dense_tol: float = 1e-8
    chain_max_diff: float
    chain_tol: float = 1e-4
    dense_ok: Optional[bool] = None
    chain_ok: bool = False

    @root_validator(skip_on_failure=True)
    def _agree(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        distance = values["dense_distance"]
        values["dense_ok"] = None if distance is None else distance <= values["dense_tol"]
        values["chain_ok"] = values["chain_max_diff"] <= values["chain_tol"]
        return values


class LadderLevelRecord(BaseModel):
    level: int
    rho: float
    residual: float
    iterations: int
    delta: float
    delta_bound: float
    n_plus: float
    n_minus: float
    c: float
    min_divisor: float
    nu_power: float
    margin: float
    delta_ok: bool = False

    @root_validator(skip_on_failure=True)
    def _delta_ok(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        values["delta_ok"] = values["delta"] <= values["delta_bound"]
        return values


class LadderReport(BaseModel):
    rho: float
    rho_inf: float
    completed: bool
    halted_at: Optional[int] = None
    halt_reason: Optional[str] = None
    levels: List[LadderLevelRecord] = Field(default_factory=list)
    delta_sum: float = 0.0
    delta_sum_bound: float = 0.0
    uniform_ok: bool = False

    @root_validator(skip_on_failure=True)
    def _uniform(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        levels = values["levels"]
        values["delta_sum"] = sum(level.delta for level in levels)
        values["delta_sum_bound"] = sum(level.delta_bound for level in levels)
        values["uniform_ok"] = values["completed"] and all(level.delta_ok for level in levels)
        return values


class VerificationReport(BaseModel):
    kind: str
    converged: bool
    iterations: int
    tol: float
    residual: float
    rho_final: float
    residual_half: Optional[float] = None
    eps0: float
    lam: float = 0.0
    lam_shift: float = 0.0
    h_shift: float = 0.0
    c1_ratio: Optional[float] = None
    c2_ratio: Optional[float] = None
    condition: ConditionNumbers
    n_plus_cap: float = float("inf")
    n_minus_cap: float = float("inf")
    c_floor: float = 0.0
    diophantine: Optional[DiophantineReport] = None
    min_divisor: float
    divisor_floor_hits: int = 0
    truncation_loss: float = 0.0
    hull_norm: float = 0.0
    margin: float
    linearized: Optional[LinearizedBounds] = None
    vanishing: Optional[VanishingReport] = None
    uniqueness: Optional[UniquenessReport] = None
    oracle: Optional[OracleReport] = None
    history: List[IterationRecord] = Field(default_factory=list)
    flags: Dict[str, bool] = Field(default_factory=dict)

    @root_validator(skip_on_failure=True)
    def _flags(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        condition = values["condition"]
        flags = {
            "residual_ok": values["residual"] <= values["tol"],
            "nondegenerate_ok": (
                condition.c >= values["c_floor"]
                and condition.n_plus <= values["n_plus_cap"]
                and condition.n_minus <= values["n_minus_cap"]
            ),
            "margin_ok": values["margin"] > 0,
            "divisor_ok": values["divisor_floor_hits"] == 0,
        }
        if values.get("diophantine") is not None:
            flags["diophantine_ok"] = values["diophantine"].passed
        if values.get("linearized") is not None:
            flags["h5_ok"] = values["linearized"].h5_ok
        if values.get("vanishing") is not None and values["vanishing"].applicable:
            flags["vanishing_ok"] = values["vanishing"].passed
        if values.get("uniqueness") is not None:
            flags["uniqueness_ok"] = values["uniqueness"].agree
        if values.get("oracle") is not None:
            oracle = values["oracle"]
            if oracle.dense_ok is not None:
                flags["oracle_dense_ok"] = oracle.dense_ok
            flags["oracle_chain_ok"] = oracle.chain_ok
        values["flags"] = flags
        return values

    def flat(self) -> List[Tuple[str, Any]]:
        """Return the report as dotted key/value pairs, without the iteration table."""
        return flatten(self, exclude={"history"})


def _flatten(data: Dict[str, Any], prefix: str = "") -> List[Tuple[str, Any]]:
    items: List[Tuple[str, Any]] = []
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(_flatten(value, f"{name}."))
        else:
            items.append((name, value))
    return items


def flatten(model: BaseModel, exclude: Optional[Set[str]] = None) -> List[Tuple[str, Any]]:
    """Return any report model as dotted key/value pairs."""
    return _flatten(model.dict(exclude=exclude))
