from fredholm_backstepping.registry import register_kernel


def kernel_type(*names):
    """
    Decorator registering a kernel descriptor builder under one or more
    configuration names (the value of `kernel.type`).

    Works on classes and on plain functions; the decorated object is returned
    unchanged.
    """

    def decorator(builder):
        if not hasattr(builder, "kernel_type_names"):
            builder.kernel_type_names = []
        for name in names:
            builder.kernel_type_names.append(name)
            register_kernel(name, builder)
        return builder

    return decorator
