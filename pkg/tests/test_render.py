import os
import sys
from concurrent.futures import ThreadPoolExecutor

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from conftest import figure_spec
from fractal import chaos_game, table_sample, vm_table
from render import render_graph


def test_render_table_png(tmp_path):
    sample = table_sample(vm_table(figure_spec(2, 0.6), 4))
    first = render_graph(sample, tmp_path / 'a.png', 'figure 2')
    second = render_graph(sample, tmp_path / 'b.png', 'figure 2')
    data = first.read_bytes()
    assert data.startswith(b'\x89PNG')
    assert data == second.read_bytes()


def test_render_chaos_png(tmp_path):
    sample = chaos_game(figure_spec(1, 0.3), 300, 1)
    path = render_graph(sample, tmp_path / 'chaos.png')
    assert path.stat().st_size > 0


def test_render_from_threads(tmp_path):
    sample = table_sample(vm_table(figure_spec(3, 0.9), 4))
    expected = render_graph(sample, tmp_path / 'serial.png').read_bytes()
    with ThreadPoolExecutor(max_workers=4) as pool:
        paths = list(pool.map(lambda k: render_graph(sample, tmp_path / f'{k}.png'), range(8)))
    assert all(path.read_bytes() == expected for path in paths)
