"""Trapped-ion RF side-channel laboratory: emission simulator and pulse/gate analyzer."""

__version__ = "0.1.0"
