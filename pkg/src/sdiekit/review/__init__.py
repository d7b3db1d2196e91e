from .store import ConflictError, NotFoundError, ReviewItem, ReviewStore, ValidationError

__all__ = ["ConflictError", "NotFoundError", "ReviewItem", "ReviewStore", "ValidationError"]
