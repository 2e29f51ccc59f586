# This file is part of pykslab.

# pykslab is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.

# pykslab is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.

# You should have received a copy of the GNU General Public License
# along with pykslab. If not, see <http://www.gnu.org/licenses/>.


import logging
import math
from typing import Callable, Dict, List, NamedTuple, Optional

from pykslab.chi import ChiProfile, check_radial_monotone
from pykslab.errors import DomainError, RangeError, RegimeError, SingularityError
from pykslab.model import ball_volume, critical_mass_blowup, critical_mass_global

logger = logging.getLogger(__name__)

TWO_D = 'two-d-variable-chi'
P_EQUALS_N = 'p-equals-n'
P_BELOW_N = 'p-below-n'

BLOWUP = 'blowup-certified'
GLOBAL = 'global-certified'
INDETERMINATE = 'indeterminate'

RK4_STEPS = 10 ** 4
HIT_TOLERANCE = 1e-10


class MomentBound(object):
    '''Parameters of the differential inequality dm/dt <= f(m).

    Args:
        n: Ambient dimension.
        chi: Coefficient strength; chi(0) in the planar case.
        M: Total mass.
        p: Exponent of the |x|^{p-2} weight, required for n >= 3.

    Attributes:
        n (int): Ambient dimension.
        p (float): Exponent, 2 in the planar case.
        chi (float): Coefficient strength.
        M (float): Total mass.
        regime (str): 'two-d-variable-chi', 'p-equals-n' or 'p-below-n'.

    Raises:
        DomainError: If M or chi is not positive.
        RegimeError: If (n, p) is outside every regime.
    '''

    def __init__(self, n: int, chi: float, M: float, p: Optional[float] = None) -> None:
        if not M > 0.0:
            raise DomainError('Mass must be positive, got {}.'.format(M))
        if not chi > 0.0:
            raise DomainError('Coefficient must be positive, got {}.'.format(chi))
        self.n = int(n)
        self.chi = float(chi)
        self.M = float(M)
        self.regime = self._regime(self.n, p)
        self.p = 2.0 if self.regime == TWO_D else float(p)

    @staticmethod
    def _regime(n: int, p: Optional[float]) -> str:
        if n == 2:
            return TWO_D
        if n < 2 or p is None:
            raise RegimeError('No moment regime for n={} and p={}.'.format(n, p))
        if p == n:
            return P_EQUALS_N
        if 2.0 <= p < n:
            return P_BELOW_N
        raise RegimeError('Exponent must satisfy 2 <= p <= n, got p={} n={}.'.format(p, n))

    @property
    def depends_on_moment(self) -> bool:
        return self.regime == P_BELOW_N

    def __repr__(self) -> str:
        return 'MomentBound(n={}, p={}, chi={}, M={}, regime={})'.format(
            self.n, self.p, self.chi, self.M, self.regime)


def bound_rhs(bound: MomentBound, m: float) -> float:
    '''Returns f(m), the right-hand side of dm/dt <= f(m).

        two-d-variable-chi:  4M - chi(0) M^2 / (2 pi)
        p-equals-n:          4M - 2^{2-n} chi M^2 / (n alpha_n)
        p-below-n:           4M - 2^{2-(p+n)/2} chi M^{2+(n-p)/2} m^{(p-n)/2} / (n alpha_n)

    Raises:
        SingularityError: If m <= 0 in the p-below-n regime.
    '''
    n, M, chi = bound.n, bound.M, bound.chi
    if bound.regime == TWO_D:
        return 4.0 * M - chi * M * M / (2.0 * math.pi)
    alpha = ball_volume(n)
    if bound.regime == P_EQUALS_N:
        return 4.0 * M - 2.0 ** (2 - n) * chi * M * M / (n * alpha)
    if not m > 0.0:
        raise SingularityError('f(m) needs m > 0 when p < n, got {}.'.format(m))
    p = bound.p
    coefficient = 2.0 ** (2.0 - 0.5 * (p + n)) * chi / (n * alpha)
    return 4.0 * M - coefficient * M ** (2.0 + 0.5 * (n - p)) * m ** (0.5 * (p - n))


def cb_threshold(n: int, p: float, chi: float, M: float) -> float:
    '''Returns C M^{(n-p+2)/(n-p)}, C = (chi / (2^{(p+n)/2} n alpha_n))^{2/(n-p)}.

    Initial second moments strictly below this value certify finite-time
    blow-up when 2 <= p < n.

    Raises:
        RegimeError: If p >= n or n < 3.
        DomainError: If p < 2 or chi, M are not positive.
    '''
    if n < 3 or p >= n:
        raise RegimeError('The moment threshold needs n >= 3 and p < n, got n={} p={}.'.format(n, p))
    if p < 2.0:
        raise DomainError('Exponent must be >= 2, got {}.'.format(p))
    if not (chi > 0.0 and M > 0.0):
        raise DomainError('chi and M must be positive.')
    C = (chi / (2.0 ** (0.5 * (p + n)) * n * ball_volume(n))) ** (2.0 / (n - p))
    return C * M ** ((n - p + 2.0) / (n - p))


def _rk4(f: Callable[[float], float], m: float, h: float) -> Optional[float]:
    '''Returns one RK4 step of dm/dt = f(m), or None if a stage leaves m > 0.'''
    k1 = f(m)
    stage = m + 0.5 * h * k1
    if stage <= 0.0:
        return None
    k2 = f(stage)
    stage = m + 0.5 * h * k2
    if stage <= 0.0:
        return None
    k3 = f(stage)
    stage = m + h * k3
    if stage <= 0.0:
        return None
    k4 = f(stage)
    return m + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def _hit_time(f: Callable[[float], float], m0: float, linear: float) -> float:
    h = linear / RK4_STEPS
    t, m = 0.0, m0
    for _ in range(4 * RK4_STEPS):
        trial = _rk4(f, m, h)
        if trial is not None and trial > 0.0:
            t, m = t + h, trial
            continue
        lo, hi = 0.0, h
        while hi - lo > HIT_TOLERANCE * (t + h):
            mid = 0.5 * (lo + hi)
            trial = _rk4(f, m, mid)
            if trial is None or trial <= 0.0:
                hi = mid
            else:
                lo = mid
        return t + hi
    return t


def blowup_time_upper(bound: MomentBound, m0: float) -> Optional[float]:
    '''Returns an upper bound on the existence time certified by dm/dt <= f(m).

    When f does not depend on m the bound is m0 / |f|. In the p-below-n
    regime f is increasing in m, so along dm/dt = f(m) the rate stays below
    f(m0) < 0; the time for that trajectory to reach zero is integrated with
    a fixed-step RK4 scheme (step m0 / |f(m0)| / 10^4) and bisection on the
    crossing step, and never exceeds m0 / |f(m0)|.

    Returns:
        Optional[float]: The bound, or None when f(m0) >= 0 (no certificate).

    Raises:
        DomainError: If m0 <= 0.
    '''
    if not m0 > 0.0:
        raise DomainError('Initial second moment must be positive, got {}.'.format(m0))
    f0 = bound_rhs(bound, m0)
    if f0 >= 0.0:
        return None
    linear = m0 / abs(f0)
    if not bound.depends_on_moment:
        return linear
    hit = _hit_time(lambda m: bound_rhs(bound, m), m0, linear)
    return min(hit, linear)


class BlowupCertificate(NamedTuple):
    '''Blow-up time bounds for one initial moment.

    Attributes:
        rate (float): f(m0).
        linear_bound (Optional[float]): m0 / |f(m0)| when f(m0) < 0.
        hit_time (Optional[float]): Result of :func:`blowup_time_upper`.
    '''
    rate: float
    linear_bound: Optional[float]
    hit_time: Optional[float]


def certified_blowup_time(bound: MomentBound, m0: float) -> BlowupCertificate:
    '''Returns both the linear and the integrated blow-up time bounds.'''
    rate = bound_rhs(bound, m0)
    linear = m0 / abs(rate) if rate < 0.0 else None
    return BlowupCertificate(rate, linear, blowup_time_upper(bound, m0))


class Classification(object):
    '''Outcome of the threshold decision tree.

    Margins are signed distances `quantity - threshold`: a positive
    'blowup-mass' margin or a negative 'blowup-moment' margin certifies
    blow-up; a negative 'global-mass' margin certifies global existence.

    Attributes:
        regime (str): Moment regime.
        certificate (str): 'blowup-certified', 'global-certified' or 'indeterminate'.
        thresholds (Dict[str, float]): Thresholds that apply.
        margins (Dict[str, float]): Signed distances to `thresholds`.
        hypotheses (Dict[str, bool]): Hypotheses checked and their outcome.
        reasons (List[str]): Why a certificate was withheld.
        inputs (Dict[str, object]): Echo of the inputs.
    '''

    def __init__(self, regime: str, inputs: Dict[str, object]) -> None:
        self.regime = regime
        self.certificate = INDETERMINATE
        self.thresholds = {}  # type: Dict[str, float]
        self.margins = {}  # type: Dict[str, float]
        self.hypotheses = {}  # type: Dict[str, bool]
        self.reasons = []  # type: List[str]
        self.inputs = inputs

    def certify(self, certificate: str) -> None:
        if self.certificate != INDETERMINATE and self.certificate != certificate:
            raise AssertionError('Blow-up and global certificates are exclusive.')
        self.certificate = certificate

    def to_dict(self) -> Dict[str, object]:
        '''Returns a JSON-compatible document.'''
        return {
            'regime': self.regime,
            'certificate': self.certificate,
            'thresholds': dict(self.thresholds),
            'margins': dict(self.margins),
            'hypotheses-checked': dict(self.hypotheses),
            'reasons': list(self.reasons),
            'inputs': dict(self.inputs),
        }

    def __repr__(self) -> str:
        return 'Classification(regime={}, certificate={}, margins={})'.format(
            self.regime, self.certificate, self.margins)


def _classify_planar(result: Classification, profile: ChiProfile, M: float, samples: int, seed: int) -> None:
    report = check_radial_monotone(profile, samples, seed, n=2)
    monotone = report.holds and profile.declared_monotone
    result.hypotheses['radially-nondecreasing'] = monotone
    try:
        chi0 = profile.chi_at_origin
    except RangeError:
        chi0 = 0.0
    result.hypotheses['chi-at-origin-positive'] = chi0 > 0.0

    if not monotone:
        result.reasons.append('chi is not radially nondecreasing')
        return
    if not chi0 > 0.0:
        result.reasons.append('chi(0) is not positive')
        return
    threshold = critical_mass_blowup(2, chi0)
    result.thresholds['blowup-mass'] = threshold
    result.margins['blowup-mass'] = M - threshold
    if M > threshold:
        result.certify(BLOWUP)


def _classify_power(result: Classification, profile: ChiProfile, n: int, p: float, M: float,
        m0: Optional[float]) -> None:
    law = profile.power_law()
    matches = law is not None and law[1] == p
    result.hypotheses['power-law-coefficient'] = matches
    if not matches:
        result.reasons.append('chi is not of the form chi |x|^(p-2) with p={}'.format(p))
        return
    strength = law[0]

    if result.regime == P_EQUALS_N:
        threshold = critical_mass_blowup(n, strength, p)
        result.thresholds['blowup-mass'] = threshold
        result.margins['blowup-mass'] = M - threshold
        if M > threshold:
            result.certify(BLOWUP)
        return

    threshold = cb_threshold(n, p, strength, M)
    result.thresholds['blowup-moment'] = threshold
    if m0 is None:
        result.reasons.append('initial second moment unknown')
        return
    result.margins['blowup-moment'] = m0 - threshold
    if m0 < threshold:
        result.certify(BLOWUP)


def _classify_global(result: Classification, profile: ChiProfile, n: int, M: float, radial: bool) -> None:
    law = profile.power_law()
    weight = law is not None and law[1] == n
    result.hypotheses['radial-ball-setting'] = bool(radial)
    result.hypotheses['weight-x-to-n-minus-2'] = weight
    if not (radial and weight):
        return
    threshold = critical_mass_global(n, law[0])
    result.thresholds['global-mass'] = threshold
    result.margins['global-mass'] = M - threshold
    if M < threshold:
        result.certify(GLOBAL)


def classify(n: int,
        p: Optional[float],
        chi_profile: ChiProfile,
        M: float,
        m0: Optional[float] = None,
        radial_setting: bool = False,
        monotone_samples: int = 4096,
        seed: int = 0) -> Classification:
    '''Classifies initial data against the blow-up and global-existence thresholds.

    Planar data (n = 2) is certified to blow up when chi is radially
    nondecreasing, chi(0) > 0 and M > 8 pi / chi(0). For n >= 3 the
    coefficient must be chi |x|^{p-2}; blow-up is certified by the mass
    threshold when p = n and by the moment threshold when p < n. Global
    existence is certified only in the radial ball setting with coefficient
    chi |x|^{n-2} and M < 2 n omega_n / chi.

    Args:
        n (int): Ambient dimension.
        p (Optional[float]): Exponent of the weight (ignored when n = 2).
        chi_profile: Coefficient profile.
        M (float): Total mass.
        m0 (Optional[float]): Initial second moment, needed when p < n.
        radial_setting (bool): True for radial data in a ball.
        monotone_samples (int): Pairs drawn to check radial monotonicity.
        seed (int): Seed of the monotonicity check.

    Returns:
        Classification: The decision and its margins.
    '''
    if not M > 0.0:
        raise DomainError('Mass must be positive, got {}.'.format(M))
    if n != 2 and p is None:
        law = chi_profile.power_law()
        p = law[1] if law is not None else None
    regime = MomentBound._regime(n, p)
    inputs = {'n': n, 'p': p if regime != TWO_D else None, 'M': M, 'm0': m0,
              'chi': chi_profile.to_document(), 'radial-setting': bool(radial_setting)}
    result = Classification(regime, inputs)

    if regime == TWO_D:
        _classify_planar(result, chi_profile, M, monotone_samples, seed)
    else:
        _classify_power(result, chi_profile, n, p, M, m0)
    _classify_global(result, chi_profile, n, M, radial_setting)

    logger.info('classified n=%s p=%s M=%g: %s', n, p, M, result.certificate)
    return result
