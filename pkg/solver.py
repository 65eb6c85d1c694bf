"""
Модуль для численного поиска вращающихся пар: внешний интерфейс и Ω по заданному внутреннему эллипсу
"""
import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from cauchy import ellipse_exterior, ellipse_exterior_derivative, ellipse_gamma_plus
from config import DEFAULT_N, MAX_ITER
from constants import INSIDE, PER_ARC_LENGTH
from contours import Contour, EllipseSpec, area, classify_points, sample_ellipse
from errors import GeometryError, ScenarioError, VStateError
from field import PatchPair
from inverse import ellipse_from_affine, fit_affine_gamma_plus
from rotation import ResidualReport, RotationCandidate, confocal_outer, flierl_polvani, residual_joint

logger = logging.getLogger(__name__)

DEFAULT_K_MAX = 20
RESIDUAL_TOL = 1e-10
STEP_TOL = 1e-12
FD_EPS = 1e-5
MAX_BISECTIONS = 3


@dataclass(frozen=True)
class OuterAnsatz:
    """r(s) = r0(1 + Σ β_j cos 2js) в системе внутреннего эллипса, плюс Ω"""
    r0: float
    betas: Tuple[float, ...]
    omega: float
    center: complex = 0j
    tilt: float = 0.0

    def __post_init__(self):
        if self.r0 <= 0:
            raise GeometryError(f"mean radius must be positive, got {self.r0}")
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))

    @property
    def k_max(self) -> int:
        return len(self.betas)

    @property
    def params(self) -> np.ndarray:
        """Вектор неизвестных (β_1..β_k, r0, Ω)"""
        return np.array([*self.betas, self.r0, self.omega])

    def with_params(self, p: np.ndarray) -> "OuterAnsatz":
        k = self.k_max
        return replace(self, betas=tuple(p[:k]), r0=float(p[k]), omega=float(p[k + 1]))

    def dilated(self, k: float) -> "OuterAnsatz":
        return replace(self, r0=self.r0 * k)

    def truncated(self, k_max: int) -> "OuterAnsatz":
        """Тот же ряд с k_max гармониками (лишние отбрасываются, недостающие нулевые)"""
        if k_max == self.k_max:
            return self
        return replace(self, betas=tuple(self.betas[:k_max]) + (0.0,) * max(0, k_max - self.k_max))

    def perturbed(self, rng: np.random.Generator, size: float) -> "OuterAnsatz":
        """Случайное двукратно-симметричное возмущение относительной величины size"""
        noise = rng.uniform(-size, size, self.k_max + 1)
        return replace(self, betas=tuple(np.array(self.betas) + noise[:-1] / (1 + np.arange(self.k_max))),
                       r0=self.r0 * (1 + noise[-1]))

    def radius(self, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """r(s) и r′(s)"""
        j = 2 * np.arange(1, self.k_max + 1)
        beta = np.array(self.betas)
        r = self.r0 * (1 + np.cos(np.outer(s, j)) @ beta)
        dr = -self.r0 * (np.sin(np.outer(s, j)) * j) @ beta
        return r, dr

    def nodes(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        s = 2 * np.pi * np.arange(n) / n
        r, dr = self.radius(s)
        rot = np.exp(1j * (s + self.tilt))
        return self.center + r * rot, (dr + 1j * r) * rot

    def to_contour(self, n: int) -> Contour:
        z, dz = self.nodes(n)
        return Contour(z, dz, ccw=True)

    @classmethod
    def from_ellipse(cls, spec: EllipseSpec, k_max: int = DEFAULT_K_MAX, omega: float = 0.0,
                     center: Optional[complex] = None, tilt: Optional[float] = None, n_fit: int = 512) -> "OuterAnsatz":
        """Полярный радиус эллипса, разложенный по cos 2js"""
        center = spec.center if center is None else complex(center)
        tilt = spec.tilt if tilt is None else float(tilt)
        if abs(spec.center - center) > 1e-12 * spec.a:
            raise GeometryError("ellipse must share the ansatz center")
        s = 2 * np.pi * np.arange(n_fit) / n_fit
        phi = s + tilt - spec.tilt
        r = spec.a * spec.b / np.sqrt((spec.b * np.cos(phi)) ** 2 + (spec.a * np.sin(phi)) ** 2)
        coeffs = np.fft.rfft(r) / n_fit
        r0 = float(coeffs[0].real)
        betas = 2 * coeffs[2:2 * k_max + 1:2].real / r0
        return cls(r0, tuple(betas), omega, center, tilt)


def default_ansatz(inner: EllipseSpec, alpha: float, k_max: int = DEFAULT_K_MAX) -> OuterAnsatz:
    """Начальное приближение: конфокальный эллипс и Ω₋ из замкнутых формул, иначе внутренний эллипс × 1.25"""
    inner = inner.canonical()
    try:
        params = flierl_polvani(inner.q, alpha)
        outer = confocal_outer(inner, params.Q1)
        return OuterAnsatz.from_ellipse(outer, k_max, params.omega_minus)
    except VStateError as e:
        logger.info(f"No closed-form initial guess ({e}); starting from the dilated inner ellipse")
    guess = EllipseSpec(1.25 * inner.a, 1.25 * inner.b, inner.center, inner.tilt)
    return OuterAnsatz.from_ellipse(guess, k_max)


@dataclass(frozen=True)
class ContinuationResult:
    solutions: List[Tuple[OuterAnsatz, ResidualReport]]
    alphas: List[float]
    aborted_alpha: Optional[float] = None

    @property
    def omegas(self) -> np.ndarray:
        return np.array([a.omega for a, _ in self.solutions])

    @property
    def q1s(self) -> np.ndarray:
        return np.array([r.meta.get("q1", np.nan) for _, r in self.solutions])


@dataclass
class _Problem:
    """Фиксированные данные задачи: внутренний эллипс, его узлы и уровень alpha"""
    inner: EllipseSpec
    alpha: float
    n: int
    inner_nodes: np.ndarray = field(init=False)
    inner_derivs: np.ndarray = field(init=False)
    inner_gamma_plus: np.ndarray = field(init=False)

    def __post_init__(self):
        c = sample_ellipse(self.inner, self.n)
        self.inner_nodes = np.array(c.samples)
        self.inner_derivs = np.array(c.derivs)
        self.inner_gamma_plus = ellipse_gamma_plus(self.inner, self.inner_nodes)


@dataclass
class _Fields:
    """Промежуточные величины одной оценки невязки"""
    z: np.ndarray
    dz: np.ndarray
    diff: np.ndarray
    kernel: np.ndarray
    g: np.ndarray
    e_outer: np.ndarray
    ext_deriv: np.ndarray
    sep: np.ndarray
    u: np.ndarray
    total: np.ndarray
    gamma1: np.ndarray
    residual: np.ndarray


def _shape_derivatives(ansatz: OuterAnsatz, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """∂z/∂p и ∂z′/∂p для β_1..β_k и r0 (строки)"""
    s = 2 * np.pi * np.arange(n) / n
    rot = np.exp(1j * (s + ansatz.tilt))
    j = 2 * np.arange(1, ansatz.k_max + 1)
    cos, sin = np.cos(np.outer(j, s)), np.sin(np.outer(j, s))
    r, dr = ansatz.radius(s)
    eta = np.vstack([ansatz.r0 * cos * rot, (r / ansatz.r0) * rot])
    deta = np.vstack([ansatz.r0 * (-j[:, None] * sin + 1j * cos) * rot, (dr + 1j * r) / ansatz.r0 * rot])
    return eta, deta


def _fields(ansatz: OuterAnsatz, prob: _Problem) -> _Fields:
    z, dz = ansatz.nodes(prob.n)
    h = 2 * np.pi / prob.n
    alpha, center = prob.alpha, ansatz.center
    lam = 1 - 2 * ansatz.omega

    diff = z[None, :] - z[:, None]
    np.fill_diagonal(diff, 1.0)
    kernel = np.conj(diff) / diff
    np.fill_diagonal(kernel, 0.0)
    self_sum = (kernel @ dz + np.conj(dz)) * h / (2j * np.pi)
    g = self_sum + np.conj(z)

    gamma2_minus = -ellipse_exterior(prob.inner, z)
    w = z - center
    e_outer = lam * np.conj(w) + np.conj(center) + (1 - alpha) * gamma2_minus - g
    r_outer = np.real(e_outer * dz)

    zi, dzi = prob.inner_nodes, prob.inner_derivs
    sep = z[None, :] - zi[:, None]
    u = dz[None, :] / sep
    total = u.sum(axis=1)
    gamma1 = (u @ g) / total
    wi = zi - center
    e_inner = ((alpha - 2 * ansatz.omega) * np.conj(wi) + alpha * np.conj(center)
               + (1 - alpha) * prob.inner_gamma_plus - gamma1)
    r_inner = np.real(e_inner * dzi)

    return _Fields(
        z=z, dz=dz, diff=diff, kernel=kernel, g=g, e_outer=e_outer,
        ext_deriv=ellipse_exterior_derivative(prob.inner, z), sep=sep, u=u, total=total, gamma1=gamma1,
        residual=np.concatenate([r_outer, r_inner, [r_inner.mean()]]),
    )


def _displacement_column(f: _Fields, prob: _Problem, omega: float, et: np.ndarray, det: np.ndarray) -> np.ndarray:
    """Производная невязки при смещении узлов внешнего контура на et (производных на det)"""
    h = 2 * np.pi / prob.n
    alpha, lam = prob.alpha, 1 - 2 * omega
    d_eta = et[None, :] - et[:, None]
    d_kernel = np.conj(d_eta) / f.diff - f.kernel * d_eta / f.diff
    np.fill_diagonal(d_kernel, 0.0)
    d_self = (d_kernel @ f.dz + f.kernel @ det + np.conj(det)) * h / (2j * np.pi)
    dg = d_self + np.conj(et)
    d_e_outer = lam * np.conj(et) - (1 - alpha) * f.ext_deriv * et - dg
    outer = np.real(d_e_outer * f.dz + f.e_outer * det)

    du = det[None, :] / f.sep - f.dz[None, :] * et[None, :] / f.sep ** 2
    d_gamma1 = ((f.u @ dg) + ((f.g[None, :] - f.gamma1[:, None]) * du).sum(axis=1)) / f.total
    inner = np.real(-d_gamma1 * prob.inner_derivs)
    return np.concatenate([outer, inner, [inner.mean()]])


def _jacobian(f: _Fields, ansatz: OuterAnsatz, prob: _Problem) -> np.ndarray:
    eta, deta = _shape_derivatives(ansatz, prob.n)
    columns = [_displacement_column(f, prob, ansatz.omega, et, det) for et, det in zip(eta, deta)]
    r_outer = np.real(-2 * np.conj(f.z - ansatz.center) * f.dz)
    r_inner = np.real(-2 * np.conj(prob.inner_nodes - ansatz.center) * prob.inner_derivs)
    columns.append(np.concatenate([r_outer, r_inner, [r_inner.mean()]]))
    return np.column_stack(columns)


def _dilation(f: _Fields, ansatz: OuterAnsatz, prob: _Problem) -> np.ndarray:
    """Производная невязки при растяжении внешнего контура относительно центра"""
    return _displacement_column(f, prob, ansatz.omega, f.z - ansatz.center, f.dz)


def _problem(inner: EllipseSpec, alpha: float, n: int, ansatz: OuterAnsatz) -> _Problem:
    if ansatz.k_max > n // 4:
        raise ScenarioError(f"k_max={ansatz.k_max} too large for n={n} (must be <= n/4)")
    return _Problem(inner, alpha, n)


def _normalized_sup(f: _Fields, prob: _Problem) -> float:
    """sup-норма с нормировкой на длину дуги, как в отчётах невязок"""
    h = 2 * np.pi / prob.n
    speed = np.abs(f.dz)
    r_outer = np.abs(f.residual[:prob.n]) / speed / (np.sum(speed) * h / (2 * np.pi))
    speed = np.abs(prob.inner_derivs)
    r_inner = np.abs(f.residual[prob.n:2 * prob.n]) / speed / (np.sum(speed) * h / (2 * np.pi))
    return float(max(r_outer.max(), r_inner.max()))


def residual_and_jacobian(ansatz: OuterAnsatz, inner: EllipseSpec, alpha: float,
                          n: int = DEFAULT_N) -> Tuple[np.ndarray, np.ndarray]:
    """Невязки (Γ1, Γ2, среднее по Γ2) и аналитический якобиан по (β, r0, Ω)"""
    prob = _problem(inner, alpha, n, ansatz)
    f = _fields(ansatz, prob)
    return f.residual, _jacobian(f, ansatz, prob)


def finite_difference_jacobian(ansatz: OuterAnsatz, inner: EllipseSpec, alpha: float,
                               n: int = DEFAULT_N, eps: float = 1e-6) -> np.ndarray:
    """Центральные разности невязки по каждому параметру"""
    prob = _problem(inner, alpha, n, ansatz)
    p0 = ansatz.params
    columns = []
    for i in range(len(p0)):
        step = eps * max(1.0, abs(p0[i]))
        plus, minus = p0.copy(), p0.copy()
        plus[i] += step
        minus[i] -= step
        r_plus = _fields(ansatz.with_params(plus), prob).residual
        r_minus = _fields(ansatz.with_params(minus), prob).residual
        columns.append((r_plus - r_minus) / (2 * step))
    return np.column_stack(columns)


def _system(ansatz: OuterAnsatz, prob: _Problem, bordered: bool) -> Tuple[_Fields, np.ndarray, np.ndarray]:
    """Невязка и якобиан; при bordered дополнены производной по растяжению

    На вращающемся решении невязка стационарна по растяжению внешнего контура:
    корень по r0 двукратный. Строки производной по растяжению делают корень простым.
    Якобиан этих строк берётся центральными разностями аналитического столбца.
    """
    f = _fields(ansatz, prob)
    jac = _jacobian(f, ansatz, prob)
    if not bordered:
        return f, f.residual, jac
    dilation = _dilation(f, ansatz, prob)
    p0 = ansatz.params
    columns = []
    for i in range(len(p0)):
        step = FD_EPS * max(1.0, abs(p0[i]))
        plus, minus = p0.copy(), p0.copy()
        plus[i] += step
        minus[i] -= step
        a_plus, a_minus = ansatz.with_params(plus), ansatz.with_params(minus)
        d_plus = _dilation(_fields(a_plus, prob), a_plus, prob)
        d_minus = _dilation(_fields(a_minus, prob), a_minus, prob)
        columns.append((d_plus - d_minus) / (2 * step))
    return f, np.concatenate([f.residual, dilation]), np.vstack([jac, np.column_stack(columns)])


def _system_residual(ansatz: OuterAnsatz, prob: _Problem, bordered: bool) -> np.ndarray:
    f = _fields(ansatz, prob)
    if not bordered:
        return f.residual
    return np.concatenate([f.residual, _dilation(f, ansatz, prob)])


def _gauss_newton_step(jac: np.ndarray, residual: np.ndarray, damping: float) -> np.ndarray:
    if damping <= 0:
        return linalg.lstsq(jac, -residual)[0]
    size = jac.shape[1]
    lhs = np.vstack([jac, np.sqrt(damping) * np.eye(size)])
    return linalg.lstsq(lhs, np.concatenate([-residual, np.zeros(size)]))[0]


def _admissible(ansatz: OuterAnsatz, prob: _Problem) -> bool:
    """Контур простой и строго содержит внутренний эллипс"""
    try:
        outer = ansatz.to_contour(prob.n)
    except GeometryError:
        return False
    return bool(np.all(classify_points(prob.inner_nodes, outer) == INSIDE))


def _admissible_trial(ansatz: OuterAnsatz, delta: np.ndarray,
                      prob: _Problem) -> Optional[Tuple[OuterAnsatz, np.ndarray]]:
    """Шаг, уполовиненный до сохранения вложенности (не более 20 раз)"""
    k = ansatz.k_max
    for halvings in range(21):
        p = ansatz.params + delta
        if p[k] > 0:
            trial = ansatz.with_params(p)
            if _admissible(trial, prob):
                if halvings:
                    logger.warning(f"Step halved {halvings} times to preserve containment")
                return trial, delta
        delta = delta / 2
    logger.warning("Step halving failed to keep the outer curve admissible")
    return None


def _final_report(ansatz: OuterAnsatz, inner: EllipseSpec, alpha: float, n: int) -> ResidualReport:
    outer = ansatz.to_contour(n)
    pair = PatchPair(outer, sample_ellipse(inner, n), alpha)
    report = residual_joint(pair, RotationCandidate(ansatz.omega, ansatz.center), PER_ARC_LENGTH)
    try:
        fit = fit_affine_gamma_plus(outer)
        recovered = ellipse_from_affine(fit, area(outer))
        report.meta.update(q1=abs(fit.q), c1sq=recovered.a ** 2 - recovered.b ** 2, affine_fit_residual=fit.fit_residual)
    except VStateError as e:
        logger.warning(f"Affine fit of the solved outer curve failed: {e}")
    return report


def solve_outer(inner: EllipseSpec, alpha: float, init: Optional[OuterAnsatz] = None,
                k_max: Optional[int] = None, n: int = DEFAULT_N, max_iter: int = MAX_ITER,
                tol: float = RESIDUAL_TOL, step_tol: float = STEP_TOL,
                bordered: bool = True) -> Tuple[OuterAnsatz, ResidualReport]:
    """Гаусс–Ньютон с демпфированием Левенберга для внешнего интерфейса и Ω

    Сходимость: sup-норма невязки < tol и шаг Гаусса–Ньютона < step_tol (относительно
    величины параметров). Без сходимости возвращается последнее приближение с
    meta["converged"] = False. bordered=False отключает строки растяжения
    (для экспериментов вне конфокального семейства, где корень может быть простым).
    """
    inner = inner.canonical()
    if init is None:
        init = default_ansatz(inner, alpha, k_max or DEFAULT_K_MAX)
    if k_max is not None:
        init = init.truncated(k_max)
    prob = _problem(inner, alpha, n, init)
    if not _admissible(init, prob):
        raise GeometryError("initial outer curve does not contain the inner ellipse")

    ansatz = init
    damping = 0.0
    converged = False
    iterations = 0
    last_step = np.inf
    f, residual, jac = _system(ansatz, prob, bordered)
    sup = _normalized_sup(f, prob)
    floor = 1e-14 * max(1.0, float(np.linalg.norm(residual)))
    logger.info(f"Solving outer interface: alpha={alpha}, k_max={ansatz.k_max}, n={n}, initial sup {sup:.3e}")

    while iterations < max_iter:
        iterations += 1
        delta = _gauss_newton_step(jac, residual, 0.0)
        last_step = float(np.max(np.abs(delta)))
        scale = max(1.0, float(np.max(np.abs(ansatz.params))))
        if sup < tol and last_step < step_tol * scale:
            converged = True
            break

        norm = float(np.linalg.norm(residual))
        accepted = None
        for _ in range(30):
            if damping > 0:
                delta = _gauss_newton_step(jac, residual, damping)
            trial = _admissible_trial(ansatz, delta, prob)
            if trial is None:
                break
            if np.linalg.norm(_system_residual(trial[0], prob, bordered)) <= norm + floor:
                accepted = trial
                break
            damping = max(10 * damping, 1e-10 * float(np.sum(jac ** 2)))
            logger.warning(f"Residual increased; Levenberg damping raised to {damping:.3e}")

        if accepted is None:
            break
        ansatz, delta = accepted
        last_step = float(np.max(np.abs(delta)))
        damping = damping / 10 if damping > 1e-300 else 0.0
        f, residual, jac = _system(ansatz, prob, bordered)
        sup = _normalized_sup(f, prob)
        logger.debug(f"Iteration {iterations}: sup {sup:.3e}, step {last_step:.3e}, damping {damping:.1e}")

    report = _final_report(ansatz, inner, alpha, n)
    report.meta.update(converged=converged, iterations=iterations, damping=damping,
                       last_step=last_step, solver_sup=sup, omega=ansatz.omega)
    if converged:
        logger.info(f"✅ Converged in {iterations} iterations: omega={ansatz.omega:.12f}, sup {sup:.3e}")
    else:
        logger.error(f"Solver did not converge after {iterations} iterations (sup {sup:.3e})")
    return ansatz, report


def _predict(inner: EllipseSpec, alpha: float, history: List[Tuple[float, OuterAnsatz]], n: int) -> OuterAnsatz:
    """Секущий предиктор по двум последним решениям; при потере вложенности последнее решение"""
    a_last, last = history[-1]
    if len(history) < 2:
        return last
    a_prev, prev = history[-2]
    ratio = (alpha - a_last) / (a_last - a_prev)
    p = last.params + ratio * (last.params - prev.params)
    if p[last.k_max] <= 0:
        return last
    predicted = last.with_params(p)
    return predicted if _admissible(predicted, _Problem(inner, alpha, n)) else last


def _continue_to(inner: EllipseSpec, alpha: float, history: List[Tuple[float, OuterAnsatz]],
                 init: Optional[OuterAnsatz], k_max: Optional[int], n: int, max_iter: int,
                 depth: int) -> Tuple[OuterAnsatz, ResidualReport]:
    """Решение при alpha; при неудаче шаг по alpha делится пополам"""
    guess = _predict(inner, alpha, history, n) if history else init
    ansatz, report = solve_outer(inner, alpha, guess, k_max, n, max_iter)
    if report.meta.get("converged") or not history or depth == 0:
        return ansatz, report
    mid = (history[-1][0] + alpha) / 2
    logger.warning(f"Continuation step to alpha={alpha} failed; inserting alpha={mid}")
    mid_ansatz, mid_report = _continue_to(inner, mid, history, init, k_max, n, max_iter, depth - 1)
    if not mid_report.meta.get("converged"):
        return ansatz, report
    history.append((mid, mid_ansatz))
    return _continue_to(inner, alpha, history, init, k_max, n, max_iter, depth - 1)


def continuation(inner: EllipseSpec, alphas: Sequence[float], init: Optional[OuterAnsatz] = None,
                 k_max: Optional[int] = None, n: int = DEFAULT_N, max_iter: int = MAX_ITER,
                 max_bisections: int = MAX_BISECTIONS) -> ContinuationResult:
    """Последовательные решения по alpha с секущим предиктором; первая неудача прерывает обход"""
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ScenarioError("continuation needs at least one alpha")
    steps = np.diff(alphas)
    if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ScenarioError("alphas must be strictly monotone")

    inner = inner.canonical()
    solutions: List[Tuple[OuterAnsatz, ResidualReport]] = []
    history: List[Tuple[float, OuterAnsatz]] = []
    for i, alpha in enumerate(alphas):
        ansatz, report = _continue_to(inner, alpha, history, init, k_max, n, max_iter, max_bisections)
        if not report.meta.get("converged"):
            logger.error(f"Continuation aborted at alpha={alpha} after {len(solutions)} solutions")
            return ContinuationResult(solutions, alphas[:i], alpha)
        solutions.append((ansatz, report))
        history.append((alpha, ansatz))
        logger.info(f"alpha={alpha:.6f}: omega={ansatz.omega:.12f}, q1={report.meta.get('q1', float('nan')):.10f}")
    return ContinuationResult(solutions, alphas)
