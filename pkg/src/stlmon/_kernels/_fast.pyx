# cython: language_level=3, boundscheck=False, cdivision=True
"""Compiled outward-rounded interval kernels (mirror of ``_pure``)."""

from libc.math cimport nextafter, INFINITY, fabs

BACKEND = "cython"

cdef double _SPLIT = 134217729.0  # 2**27 + 1
cdef double _BIG = 1e290
cdef double _TINY = 1e-290


cdef inline double c_down(double x) nogil:
    return nextafter(x, -INFINITY)


cdef inline double c_up(double x) nogil:
    return nextafter(x, INFINITY)


def next_down(double x):
    return c_down(x)


def next_up(double x):
    return c_up(x)


def kadd(double al, double ah, double bl, double bh):
    cdef double lo = al + bl
    cdef double hi = ah + bh
    if lo - al != bl or lo - bl != al:
        lo = c_down(lo)
    if hi - ah != bh or hi - bh != ah:
        hi = c_up(hi)
    return lo, hi


def ksub(double al, double ah, double bl, double bh):
    cdef double lo = al - bh
    cdef double hi = ah - bl
    if lo + bh != al or al - lo != bh:
        lo = c_down(lo)
    if hi + bl != ah or ah - hi != bl:
        hi = c_up(hi)
    return lo, hi


cdef inline double _prod_err(double x, double y, double p) nogil:
    cdef double xh = x * _SPLIT
    cdef double xl, yh, yl
    xh = xh - (xh - x)
    xl = x - xh
    yh = y * _SPLIT
    yh = yh - (yh - y)
    yl = y - yh
    return ((xh * yh - p) + xh * yl + xl * yh) + xl * yl


cdef inline void _prod_bounds(double x, double y, double* down, double* up) nogil:
    cdef double p = x * y
    cdef double ap = fabs(p)
    cdef double e
    if ap > _BIG or (ap < _TINY and p != 0.0):
        down[0] = c_down(p)
        up[0] = c_up(p)
        return
    e = _prod_err(x, y, p)
    if e > 0.0:
        down[0] = p
        up[0] = c_up(p)
    elif e < 0.0:
        down[0] = c_down(p)
        up[0] = p
    else:
        down[0] = p
        up[0] = p


def kmul(double al, double ah, double bl, double bh):
    cdef double d1, d2, d3, d4, u1, u2, u3, u4, lo, hi
    if (al == 0.0 and ah == 0.0) or (bl == 0.0 and bh == 0.0):
        return 0.0, 0.0
    if al == 1.0 and ah == 1.0:
        return bl, bh
    if bl == 1.0 and bh == 1.0:
        return al, ah
    _prod_bounds(al, bl, &d1, &u1)
    _prod_bounds(al, bh, &d2, &u2)
    _prod_bounds(ah, bl, &d3, &u3)
    _prod_bounds(ah, bh, &d4, &u4)
    lo = d1
    if d2 < lo: lo = d2
    if d3 < lo: lo = d3
    if d4 < lo: lo = d4
    hi = u1
    if u2 > hi: hi = u2
    if u3 > hi: hi = u3
    if u4 > hi: hi = u4
    return lo, hi


cdef inline void _quot_bounds(double a, double b, double* down, double* up) nogil:
    cdef double q = a / b
    cdef double aq = fabs(q)
    cdef double p, e, rem
    if aq > _BIG or (aq < _TINY and q != 0.0) or fabs(a) > _BIG:
        down[0] = c_down(q)
        up[0] = c_up(q)
        return
    p = q * b
    e = _prod_err(q, b, p)
    rem = (a - p) - e
    if rem == 0.0:
        down[0] = q
        up[0] = q
    elif (rem > 0.0) == (b > 0.0):
        down[0] = q
        up[0] = c_up(q)
    else:
        down[0] = c_down(q)
        up[0] = q


def kdiv(double al, double ah, double bl, double bh):
    cdef double d1, d2, d3, d4, u1, u2, u3, u4, lo, hi
    if bl == 1.0 and bh == 1.0:
        return al, ah
    _quot_bounds(al, bl, &d1, &u1)
    _quot_bounds(al, bh, &d2, &u2)
    _quot_bounds(ah, bl, &d3, &u3)
    _quot_bounds(ah, bh, &d4, &u4)
    lo = d1
    if d2 < lo: lo = d2
    if d3 < lo: lo = d3
    if d4 < lo: lo = d4
    hi = u1
    if u2 > hi: hi = u2
    if u3 > hi: hi = u3
    if u4 > hi: hi = u4
    return lo, hi
