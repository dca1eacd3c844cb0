"""BLAS thread control for the solvers.

Every dense operation in the alternating solvers is at most 64x64, where
multi-threaded BLAS is pure overhead (an order of magnitude on the MM inner
loop). Solver entry points pin BLAS to one thread for the duration of a run;
parallelism belongs at the trial level instead.
"""

from contextlib import nullcontext

try:
    from threadpoolctl import threadpool_limits

    def single_thread_blas():
        return threadpool_limits(limits=1, user_api="blas")
except ImportError:  # pragma: no cover
    def single_thread_blas():
        return nullcontext()
