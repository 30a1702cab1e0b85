# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the synthetic fitness landscape.

Must match cellnas._core.fallback bit-for-bit; the test suite checks the two
backends against each other.
"""

cdef extern from *:
    """
    #include <stdint.h>

    static inline uint64_t cellnas_splitmix64(uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }
    """
    unsigned long long cellnas_splitmix64(unsigned long long x) nogil


def splitmix64(x):
    """One step of the splitmix64 mixing function over a 64-bit integer."""
    return int(cellnas_splitmix64(<unsigned long long> (x & 0xFFFFFFFFFFFFFFFF)))


def nk_affinity(const unsigned char[:] symbols, seed, int epistasis, salt):
    """Epistatic landscape value of a symbol string, in [0, 1)."""
    cdef Py_ssize_t n = symbols.shape[0]
    if n == 0:
        raise ValueError("empty symbol string")
    if epistasis < 0:
        raise ValueError("epistasis must be >= 0")
    cdef unsigned long long useed = <unsigned long long> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef unsigned long long usalt = <unsigned long long> (salt & 0xFFFFFFFFFFFFFFFF)
    cdef unsigned long long base, h
    cdef Py_ssize_t i
    cdef int j
    cdef double total = 0.0
    with nogil:
        base = cellnas_splitmix64(useed)
        base = cellnas_splitmix64(base ^ usalt)
        for i in range(n):
            h = cellnas_splitmix64(base ^ <unsigned long long> i)
            for j in range(epistasis + 1):
                h = cellnas_splitmix64(h ^ <unsigned long long> symbols[(i + j) % n])
            total += <double> h / 18446744073709551616.0
    return total / <double> n
