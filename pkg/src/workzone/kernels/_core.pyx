# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled raster kernels.

Every routine must stay bit-identical to workzone.kernels._fallback:
float64 with the same expression structure, accumulation in tap order,
rounding as floor(x + 0.5), clamp last. setup.py compiles this with
-ffp-contract=off so the C compiler cannot fuse multiply-adds that the
numpy path keeps separate.
"""
import numpy as np

from libc.math cimport floor, fmod

from ._common import gaussian_kernel1d

BACKEND_NAME = "compiled"


cdef inline unsigned char _round_u8(double v) nogil:
    v = floor(v + 0.5)
    if v < 0.0:
        v = 0.0
    elif v > 255.0:
        v = 255.0
    return <unsigned char> v


def gaussian_blur(img, double sigma):
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return img.copy()
    k_arr = gaussian_kernel1d(sigma)
    cdef double[::1] k = k_arr
    cdef Py_ssize_t ksize = k.shape[0]
    cdef Py_ssize_t r = (ksize - 1) // 2
    cdef const unsigned char[:, :, ::1] src = img
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    tmp_arr = np.empty((h, w, 3), dtype=np.float64)
    out_arr = np.empty((h, w, 3), dtype=np.uint8)
    cdef double[:, :, ::1] tmp = tmp_arr
    cdef unsigned char[:, :, ::1] out = out_arr
    cdef Py_ssize_t x, y, c, i, xx, yy
    cdef double acc
    with nogil:
        for y in range(h):
            for x in range(w):
                for c in range(3):
                    acc = 0.0
                    for i in range(ksize):
                        xx = x + i - r
                        if xx < 0:
                            xx = 0
                        elif xx >= w:
                            xx = w - 1
                        acc = acc + k[i] * <double> src[y, xx, c]
                    tmp[y, x, c] = acc
        for y in range(h):
            for x in range(w):
                for c in range(3):
                    acc = 0.0
                    for i in range(ksize):
                        yy = y + i - r
                        if yy < 0:
                            yy = 0
                        elif yy >= h:
                            yy = h - 1
                        acc = acc + k[i] * tmp[yy, x, c]
                    out[y, x, c] = _round_u8(acc)
    return out_arr


cdef inline double _sample(const unsigned char[:, :, ::1] src,
                           Py_ssize_t yi, Py_ssize_t xi, Py_ssize_t c,
                           Py_ssize_t h, Py_ssize_t w, double fill) nogil:
    if xi < 0 or xi >= w or yi < 0 or yi >= h:
        return fill
    return <double> src[yi, xi, c]


def warp_affine(img, inv, fill):
    cdef const unsigned char[:, :, ::1] src = img
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    cdef double inv00 = inv[0, 0]
    cdef double inv01 = inv[0, 1]
    cdef double inv02 = inv[0, 2]
    cdef double inv10 = inv[1, 0]
    cdef double inv11 = inv[1, 1]
    cdef double inv12 = inv[1, 2]
    cdef double fillc[3]
    fillc[0] = float(fill[0])
    fillc[1] = float(fill[1])
    fillc[2] = float(fill[2])
    out_arr = np.empty((h, w, 3), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] out = out_arr
    cdef Py_ssize_t x, y, c, x0, y0
    cdef double xcd, ycd, sx, sy, x0f, y0f, fx, fy
    cdef double p00, p01, p10, p11, top, bot, val
    with nogil:
        for y in range(h):
            ycd = <double> y + 0.5
            for x in range(w):
                xcd = <double> x + 0.5
                sx = inv00 * xcd + inv01 * ycd + inv02 - 0.5
                sy = inv10 * xcd + inv11 * ycd + inv12 - 0.5
                x0f = floor(sx)
                y0f = floor(sy)
                fx = sx - x0f
                fy = sy - y0f
                x0 = <Py_ssize_t> x0f
                y0 = <Py_ssize_t> y0f
                for c in range(3):
                    p00 = _sample(src, y0, x0, c, h, w, fillc[c])
                    p01 = _sample(src, y0, x0 + 1, c, h, w, fillc[c])
                    p10 = _sample(src, y0 + 1, x0, c, h, w, fillc[c])
                    p11 = _sample(src, y0 + 1, x0 + 1, c, h, w, fillc[c])
                    top = (1.0 - fx) * p00 + fx * p01
                    bot = (1.0 - fx) * p10 + fx * p11
                    val = (1.0 - fy) * top + fy * bot
                    out[y, x, c] = _round_u8(val)
    return out_arr


def hsv_adjust(img, double sat_scale, double hue_shift):
    cdef const unsigned char[:, :, ::1] src = img
    cdef Py_ssize_t ih = src.shape[0]
    cdef Py_ssize_t iw = src.shape[1]
    out_arr = np.empty((ih, iw, 3), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] out = out_arr
    cdef Py_ssize_t x, y
    cdef double r, g, b, v, mn, d, hdeg, s
    cdef double hp, secf, f, p, q, t, rr, gg, bb
    cdef int sec
    with nogil:
        for y in range(ih):
            for x in range(iw):
                r = <double> src[y, x, 0] / 255.0
                g = <double> src[y, x, 1] / 255.0
                b = <double> src[y, x, 2] / 255.0
                v = r if r > g else g
                if b > v:
                    v = b
                mn = r if r < g else g
                if b < mn:
                    mn = b
                d = v - mn
                if d == 0.0:
                    hdeg = 0.0
                elif v == r:
                    hdeg = 60.0 * ((g - b) / d)
                elif v == g:
                    hdeg = 60.0 * ((b - r) / d + 2.0)
                else:
                    hdeg = 60.0 * ((r - g) / d + 4.0)
                if hdeg < 0.0:
                    hdeg = hdeg + 360.0
                if v == 0.0:
                    s = 0.0
                else:
                    s = d / v

                s = s * sat_scale
                if s > 1.0:
                    s = 1.0
                hdeg = hdeg + hue_shift
                hdeg = fmod(hdeg, 360.0)
                if hdeg != 0.0 and hdeg < 0.0:
                    hdeg = hdeg + 360.0

                hp = hdeg / 60.0
                secf = floor(hp)
                f = hp - secf
                p = v * (1.0 - s)
                q = v * (1.0 - s * f)
                t = v * (1.0 - s * (1.0 - f))
                sec = (<int> secf) % 6
                if sec == 0:
                    rr = v; gg = t; bb = p
                elif sec == 1:
                    rr = q; gg = v; bb = p
                elif sec == 2:
                    rr = p; gg = v; bb = t
                elif sec == 3:
                    rr = p; gg = q; bb = v
                elif sec == 4:
                    rr = t; gg = p; bb = v
                else:
                    rr = v; gg = p; bb = q
                out[y, x, 0] = _round_u8(rr * 255.0)
                out[y, x, 1] = _round_u8(gg * 255.0)
                out[y, x, 2] = _round_u8(bb * 255.0)
    return out_arr
