"""Transverse-Mercator projection between lon/lat degrees and planar metres.

Default parameters are the Singapore SVY21 registry values (EPSG:3414):
origin 1deg22'N 103deg50'E, unit scale, false easting 28001.642 m, false
northing 38744.572 m, on the WGS84 ellipsoid. Series expansions follow the
standard 8th-order formulation (Hoffmann-Wellenhof et al.), accurate to
well under a millimetre within a few degrees of the central meridian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# WGS84 ellipsoid
_A = 6378137.0
_B = 6356752.314245179
_N = (_A - _B) / (_A + _B)
_EP2 = (_A * _A - _B * _B) / (_B * _B)


class ProjectionError(ValueError):
    """Raised for out-of-range geographic coordinates."""


def _meridian_arc(phi: float) -> float:
    """Ellipsoidal distance from the equator to latitude phi (radians)."""
    n = _N
    alpha = (_A + _B) / 2.0 * (1.0 + n ** 2 / 4.0 + n ** 4 / 64.0)
    beta = -3.0 * n / 2.0 + 9.0 * n ** 3 / 16.0 - 3.0 * n ** 5 / 32.0
    gamma = 15.0 * n ** 2 / 16.0 - 15.0 * n ** 4 / 32.0
    delta = -35.0 * n ** 3 / 48.0 + 105.0 * n ** 5 / 256.0
    epsilon = 315.0 * n ** 4 / 512.0
    return alpha * (
        phi
        + beta * math.sin(2.0 * phi)
        + gamma * math.sin(4.0 * phi)
        + delta * math.sin(6.0 * phi)
        + epsilon * math.sin(8.0 * phi)
    )


def _footpoint_latitude(y: float) -> float:
    n = _N
    alpha = (_A + _B) / 2.0 * (1.0 + n ** 2 / 4.0 + n ** 4 / 64.0)
    y_ = y / alpha
    beta = 3.0 * n / 2.0 - 27.0 * n ** 3 / 32.0 + 269.0 * n ** 5 / 512.0
    gamma = 21.0 * n ** 2 / 16.0 - 55.0 * n ** 4 / 32.0
    delta = 151.0 * n ** 3 / 96.0 - 417.0 * n ** 5 / 128.0
    epsilon = 1097.0 * n ** 4 / 512.0
    return (
        y_
        + beta * math.sin(2.0 * y_)
        + gamma * math.sin(4.0 * y_)
        + delta * math.sin(6.0 * y_)
        + epsilon * math.sin(8.0 * y_)
    )


@dataclass(frozen=True)
class TransverseMercator:
    lat_origin: float  # degrees
    lon_origin: float  # degrees
    scale: float
    false_easting: float
    false_northing: float

    def forward(self, lon: float, lat: float) -> tuple[float, float]:
        """(lon, lat) degrees -> (easting, northing) metres."""
        if not (-180.0 <= lon <= 180.0):
            raise ProjectionError(f"longitude {lon} out of range [-180, 180]")
        if not (-90.0 < lat < 90.0):
            raise ProjectionError(f"latitude {lat} out of range (-90, 90)")
        phi = math.radians(lat)
        lam = math.radians(lon)
        lam0 = math.radians(self.lon_origin)

        nu2 = _EP2 * math.cos(phi) ** 2
        big_n = _A * _A / (_B * math.sqrt(1.0 + nu2))
        t = math.tan(phi)
        t2 = t * t
        l = lam - lam0
        c = math.cos(phi)

        l3 = 1.0 - t2 + nu2
        l4 = 5.0 - t2 + 9.0 * nu2 + 4.0 * nu2 * nu2
        l5 = 5.0 - 18.0 * t2 + t2 * t2 + 14.0 * nu2 - 58.0 * t2 * nu2
        l6 = 61.0 - 58.0 * t2 + t2 * t2 + 270.0 * nu2 - 330.0 * t2 * nu2
        l7 = 61.0 - 479.0 * t2 + 179.0 * t2 * t2 - t2 * t2 * t2
        l8 = 1385.0 - 3111.0 * t2 + 543.0 * t2 * t2 - t2 * t2 * t2

        x = (
            big_n * c * l
            + big_n / 6.0 * c ** 3 * l3 * l ** 3
            + big_n / 120.0 * c ** 5 * l5 * l ** 5
            + big_n / 5040.0 * c ** 7 * l7 * l ** 7
        )
        y = (
            _meridian_arc(phi)
            - _meridian_arc(math.radians(self.lat_origin))
            + t / 2.0 * big_n * c ** 2 * l ** 2
            + t / 24.0 * big_n * c ** 4 * l4 * l ** 4
            + t / 720.0 * big_n * c ** 6 * l6 * l ** 6
            + t / 40320.0 * big_n * c ** 8 * l8 * l ** 8
        )
        return (self.false_easting + self.scale * x, self.false_northing + self.scale * y)

    def inverse(self, x: float, y: float) -> tuple[float, float]:
        """(easting, northing) metres -> (lon, lat) degrees."""
        x = (x - self.false_easting) / self.scale
        y = (y - self.false_northing) / self.scale + _meridian_arc(math.radians(self.lat_origin))

        phif = _footpoint_latitude(y)
        cf = math.cos(phif)
        nuf2 = _EP2 * cf * cf
        nf = _A * _A / (_B * math.sqrt(1.0 + nuf2))
        tf = math.tan(phif)
        tf2 = tf * tf
        tf4 = tf2 * tf2

        nfp = nf
        x1 = 1.0 / (nfp * cf)
        nfp *= nf
        x2 = tf / (2.0 * nfp)
        nfp *= nf
        x3 = 1.0 / (6.0 * nfp * cf)
        nfp *= nf
        x4 = tf / (24.0 * nfp)
        nfp *= nf
        x5 = 1.0 / (120.0 * nfp * cf)
        nfp *= nf
        x6 = tf / (720.0 * nfp)
        nfp *= nf
        x7 = 1.0 / (5040.0 * nfp * cf)
        nfp *= nf
        x8 = tf / (40320.0 * nfp)

        x2p = -1.0 - nuf2
        x3p = -1.0 - 2.0 * tf2 - nuf2
        x4p = 5.0 + 3.0 * tf2 + 6.0 * nuf2 - 6.0 * tf2 * nuf2 - 3.0 * nuf2 * nuf2 - 9.0 * tf2 * nuf2 * nuf2
        x5p = 5.0 + 28.0 * tf2 + 24.0 * tf4 + 6.0 * nuf2 + 8.0 * tf2 * nuf2
        x6p = -61.0 - 90.0 * tf2 - 45.0 * tf4 - 107.0 * nuf2 + 162.0 * tf2 * nuf2
        x7p = -61.0 - 662.0 * tf2 - 1320.0 * tf4 - 720.0 * tf4 * tf2
        x8p = 1385.0 + 3633.0 * tf2 + 4095.0 * tf4 + 1575.0 * tf4 * tf2

        phi = (
            phif
            + x2 * x2p * x * x
            + x4 * x4p * x ** 4
            + x6 * x6p * x ** 6
            + x8 * x8p * x ** 8
        )
        lam = (
            math.radians(self.lon_origin)
            + x1 * x
            + x3 * x3p * x ** 3
            + x5 * x5p * x ** 5
            + x7 * x7p * x ** 7
        )
        return math.degrees(lam), math.degrees(phi)


# Singapore SVY21 registry parameters (EPSG:3414)
SVY21 = TransverseMercator(
    lat_origin=1.0 + 22.0 / 60.0,
    lon_origin=103.0 + 50.0 / 60.0,
    scale=1.0,
    false_easting=28001.642,
    false_northing=38744.572,
)


def project_lonlat(lon: float, lat: float) -> tuple[float, float]:
    """Project WGS84 degrees to planar metres with the default (SVY21) grid."""
    return SVY21.forward(lon, lat)


def unproject_xy(x: float, y: float) -> tuple[float, float]:
    """Inverse of :func:`project_lonlat`."""
    return SVY21.inverse(x, y)
