from pathlib import Path

from market_maps.render import ColorBy, PlotSpec, read_points, render_scatter, scatter_metadata

from ._base import AtlasCommand


class Command(AtlasCommand):
    help = 'Render projected coordinates as an SVG scatter plot'
    out_help = 'SVG file to write; a .txt side-car with the metadata is written next to it'

    def add_pipeline_arguments(self, parser):
        parser.add_argument('--coords', help='Coordinates CSV (map_coords.csv or pca_scores.csv)')
        parser.add_argument('--color-by', choices=ColorBy.values, help='Colour by period or stock')
        parser.add_argument('--title', help='Plot title')
        parser.add_argument('--width', type=int, help='Width in pixels')
        parser.add_argument('--height', type=int, help='Height in pixels')

    def run(self, config):
        self.require(config, 'coords', 'out')
        points = self.read_input(config['coords'], read_points)
        spec = PlotSpec(
            points=points,
            width=config['width'],
            height=config['height'],
            color_by=config.get('color_by') or 'period',
            title=config.get('title', ''),
        )
        path = Path(config['out'])
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_scatter(spec))
        Path(f'{path}.txt').write_text(scatter_metadata(spec))
        self.stdout.write(self.style.SUCCESS(f'Plotted {len(points)} points to {path}'))
