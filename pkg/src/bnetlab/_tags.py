"""Claim tags: ``@claim("slug")`` marks the operation that implements a
claim listed in docs/claims.txt. bnetlab.mapping checks the two agree."""


def claim(*slugs):
    def mark(obj):
        obj.__claims__ = tuple(getattr(obj, "__claims__", ())) + slugs
        return obj

    return mark
