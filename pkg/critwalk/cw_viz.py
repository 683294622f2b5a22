import os
import numpy as np
import plotly.graph_objs as go

from plotly.subplots import make_subplots
from typing import Optional, Sequence

from .cw_structs import to_json
from .cw_er import upper_tail_reference


def _usable(curve):
    rows = [r for r in curve.rows if 0 < r.phat < 1]
    A    = np.array([r.A for r in rows])
    return A, np.array([r.phat for r in rows]), rows


def plot_tail_fit(curves, fits, show: bool = True, model: Optional[str] = None, lam: float = 0.):
    """ log(-log phat) against log A per direction, with the fitted line """
    fig = make_subplots(rows=1, cols=len(curves), subplot_titles=[f'{c.direction} tail' for c in curves])
    for col, (curve, fit) in enumerate(zip(curves, fits), start=1):
        A, phat, rows = _usable(curve)
        if A.size == 0:
            continue
        x, y = np.log(A), np.log(-np.log(phat))
        lo   = np.log(-np.log(np.clip([r.ci_hi for r in rows], 1e-300, 1 - 1e-16)))
        hi   = np.log(-np.log(np.clip([r.ci_lo for r in rows], 1e-300, 1 - 1e-16)))
        fig.add_trace(go.Scatter(x=x, y=y, mode='markers', name=f'{curve.direction} estimate',
                                 error_y=dict(type='data', symmetric=False, array=hi - y, arrayminus=y - lo)),
                      row=1, col=col)
        if fit.get('slope') is not None:
            fig.add_trace(go.Scatter(x=x, y=fit.intercept + fit.slope * x, mode='lines',
                                     name=f'slope {fit.slope:.3f}'), row=1, col=col)
        if model == 'er' and curve.direction == 'upper':
            fig.add_trace(go.Scatter(x=x, y=np.log(-np.log(upper_tail_reference(A, lam))), mode='lines',
                                     line_dash='dot', name='reference shape'), row=1, col=col)
        fig.update_xaxes(title_text='log A', row=1, col=col)
        fig.update_yaxes(title_text='log(-log phat)', row=1, col=col)

    if show:
        fig.show()
    return fig


_SCRIPT = '''\
import json
import os

import numpy as np
import plotly.graph_objs as go

from plotly.subplots import make_subplots

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, {data!r})) as f:
    data = json.load(f)

curves = data['curves']
fig = make_subplots(rows=1, cols=len(curves), subplot_titles=[c['direction'] + ' tail' for c in curves])
for col, (curve, fit) in enumerate(zip(curves, data['fits']), start=1):
    rows = [r for r in curve['rows'] if 0 < r['phat'] < 1]
    if not rows:
        continue
    x = np.log([r['A'] for r in rows])
    y = np.log(-np.log([r['phat'] for r in rows]))
    fig.add_trace(go.Scatter(x=x, y=y, mode='markers', name=curve['direction'] + ' estimate'), row=1, col=col)
    if fit.get('slope') is not None:
        fig.add_trace(go.Scatter(x=x, y=fit['intercept'] + fit['slope'] * x, mode='lines',
                                 name='slope %.3f' % fit['slope']), row=1, col=col)
    if curve.get('reference'):
        fig.add_trace(go.Scatter(x=x, y=np.log(-np.log(curve['reference'])), mode='lines',
                                 line_dash='dot', name='reference shape'), row=1, col=col)
    fig.update_xaxes(title_text='log A', row=1, col=col)
    fig.update_yaxes(title_text='log(-log phat)', row=1, col=col)

fig.write_html(os.path.join(here, 'tail_plot.html'))
fig.show()
'''


def write_plot_script(out_dir: str, curves: Sequence, fits: Sequence, model: Optional[str] = None,
                      lam: float = 0.):
    """ self-contained plotting script plus its JSON data file """
    data = dict(model=model, curves=[], fits=[dict(f) for f in fits])
    for c in curves:
        entry = dict(direction=c.direction, n=c.n, rows=c.rows)
        if model == 'er' and c.direction == 'upper':
            entry['reference'] = upper_tail_reference([r.A for r in c.rows if 0 < r.phat < 1], lam)
        data['curves'].append(entry)

    data_path   = os.path.join(out_dir, 'tail_plot_data.json')
    script_path = os.path.join(out_dir, 'tail_plot.py')
    with open(data_path, 'w') as f:
        f.write(to_json(data, indent=2))
        f.write('\n')
    with open(script_path, 'w') as f:
        f.write(_SCRIPT.format(data='tail_plot_data.json'))
    return script_path, data_path
