import json

import numpy as np
import pytest

from critwalk.cw_harness import TailCurve, ExponentFit, _tail_row
from critwalk.cw_viz import plot_tail_fit, write_plot_script


def _curve(direction):
    A = [1., 1.5, 2., 3.]
    rows = [_tail_row(a, 0., 1000, int(1000 * np.exp(-a**1.5))) for a in A]
    rows.append(_tail_row(6., 0., 1000, 0))
    return TailCurve(direction, 1000, rows)


def test_plot_traces():
    curves = [_curve('lower'), _curve('upper')]
    fits   = [ExponentFit('lower', 1.5, 0., 1.4, 1.6, 4), ExponentFit.failed('upper', 'too few rows')]
    fig = plot_tail_fit(curves, fits, show=False, model='er')

    names = [t.name for t in fig.data]
    assert names == ['lower estimate', 'slope 1.500', 'upper estimate', 'reference shape']
    assert len(fig.data[0].x) == 4
    assert np.allclose(fig.data[1].y, 1.5 * np.log([1., 1.5, 2., 3.]))


def test_plot_skips_degenerate_curve():
    curve = TailCurve('lower', 10, [_tail_row(1., 0., 10, 0)])
    fig = plot_tail_fit([curve], [ExponentFit.failed('lower', 'none')], show=False)
    assert len(fig.data) == 0


def test_plot_script_files(tmp_path):
    script, data = write_plot_script(str(tmp_path), [_curve('upper')], [ExponentFit.failed('upper', 'x')],
                                     model='er', lam=0.)
    payload = json.loads(open(data).read())
    assert payload['fits'][0]['error'] == 'x'
    assert payload['curves'][0]['reference'] == pytest.approx(np.exp(-np.array([1., 1.5, 2., 3.])**3 / 8))
    assert 'tail_plot_data.json' in open(script).read()
