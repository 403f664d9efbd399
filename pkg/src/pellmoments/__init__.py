# -*- coding: utf-8 -*-
from importlib.metadata import PackageNotFoundError, version

try:
    # Change here if project is renamed and does not equal the package name
    dist_name = __name__
    __version__ = version(dist_name)
except PackageNotFoundError:
    __version__ = "unknown"
finally:
    del version, PackageNotFoundError

from .arith import Factorization, SpfTable, build_spf, factor, kronecker
from .pell import DiscriminantRecord, EnumerationRun, enumerate_run, cache_read, cache_write
from .forms import QuadForm, LApprox, class_number_cycles, class_number_hybrid, assign_class_numbers
from .charsums import CharSumCase, NiCounts
from .constants import ConstantEval, A0Eval, C_of_k, H_of_k
from .moments import MomentReport, moment_report
from .tail import TailReport, ExtremeRecord
from .util import PellMomentsError, ValidationError, DomainError, InvariantFailure
