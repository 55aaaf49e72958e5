from . import evaluation_controller, health_controller, verification_controller

__all__ = ["evaluation_controller", "health_controller", "verification_controller"]
