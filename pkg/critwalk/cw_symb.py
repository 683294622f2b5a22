import numpy as np
import symengine as si

from .cw_defaults import cw_defaults


def compile_symb_func(func, *names, wrt=None):
    """ Compile a scalar symbolic expression into a float-valued callable.

    `func` receives one symengine symbol per name and returns an expression.
    With `wrt` set to one of the names, the derivative with respect to that
    argument is compiled as well and returned second.
    """
    symbols = [si.Symbol(k) for k in names]
    expr    = func(*symbols)

    exprs = [expr]
    if wrt is not None:
        exprs.append(si.diff(expr, symbols[names.index(wrt)]))

    compiled = [si.Lambdify(symbols, [e], **cw_defaults.symengine.lambdify) for e in exprs]
    funcs    = [lambda *args, _f=f: float(np.asarray(_f([float(a) for a in args])).ravel()[0]) for f in compiled]

    return funcs[0] if wrt is None else tuple(funcs)
