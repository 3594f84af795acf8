"""
Exceptions raised by the identification library.

Every exception carries a message code, appended to the message as
" [CODE]" the same way the resultset error messages are built.
"""
from typing import Any, Optional


class IdentSuiteError(Exception):
    """Base class for all identsuite errors"""

    message_code = 'IS-E000'

    def __init__(self, msg: str = '', message_code: Optional[str] = None,
                 payload: Any = None):
        super().__init__(msg)
        self.msg = msg
        if message_code:
            self.message_code = message_code
        # Partial results (best iterate, history...) when there are any
        self.payload = payload

    def __str__(self) -> str:
        return f"{self.msg} [{self.message_code}]"


class SingularInertia(IdentSuiteError):
    """Inertia matrix determinant below the configured floor"""
    message_code = 'DYN-E010'


class NonPositiveInertia(IdentSuiteError):
    """Effective inertia of an iterate is not strictly positive"""
    message_code = 'CTL-E010'


class IntegrationFailure(IdentSuiteError):
    """The ODE solver could not integrate the closed loop"""
    message_code = 'SIM-E010'


class RecordTooShort(IdentSuiteError):
    """The record doesn't outlast the transient period"""
    message_code = 'SIM-E020'


class DimensionMismatch(IdentSuiteError):
    """Series or matrices with incompatible shapes"""
    message_code = 'GEN-E010'


class SeriesTooShort(IdentSuiteError):
    """Not enough samples for the requested filter or difference"""
    message_code = 'SIG-E010'


class RankDeficient(IdentSuiteError):
    """Observation matrix rank deficient or too ill-conditioned"""
    message_code = 'EST-E010'


class MaxIterations(IdentSuiteError):
    """Iterative estimator reached max_iterations without converging"""
    message_code = 'EST-E020'


class NonConvergence(IdentSuiteError):
    """Output error residual increased on consecutive iterations"""
    message_code = 'EST-E030'


class ConfigInvalid(IdentSuiteError):
    """Invalid or inconsistent configuration"""
    message_code = 'CFG-E010'


class BandwidthMismatch(IdentSuiteError):
    """Simulated loops far slower than the actual ones"""
    message_code = 'EST-E040'
