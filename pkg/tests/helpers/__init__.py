from .signal_helper import SignalFactory

__all__ = ("SignalFactory",)
