"""BLAS threading control for the iterative drivers.

The solver pipelines alternate thousands of small dense kernels (n in the
tens to low hundreds).  Multithreaded BLAS synchronization dominates at
these sizes - measured 30x slowdowns on small machines - so the drivers
pin BLAS to one thread for their duration.  Entry costs ~0.4 ms, so use
this around whole sweeps, not inner loops.
"""

try:
    from threadpoolctl import threadpool_limits

    def single_thread_blas():
        return threadpool_limits(limits=1, user_api="blas")

except ImportError:  # pragma: no cover - threadpoolctl is a declared dep
    import contextlib

    def single_thread_blas():
        return contextlib.nullcontext()
