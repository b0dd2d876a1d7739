"""
SnapshotRenderer class for the flame front laboratory.

Draws a Cartesian snapshot as a heat map on an off-screen pygame surface,
overlays the inscribed and circumscribed circles of the positivity set and
saves the result as a PNG. No window is opened.
"""
import logging
import os
from pathlib import Path
from typing import Tuple, Union

os.environ.setdefault("PYGAME_HIDE_SUPPORT_PROMPT", "1")
import numpy as np
import pygame

logger = logging.getLogger(__name__)


class SnapshotRenderer:
    """
    Renders ScalarField snapshots to PNG files.

    Zero cells take the background colour; positive values run through a
    black-red-yellow-white flame ramp scaled to the snapshot maximum.
    """

    # Colors
    BACKGROUND_COLOR = (16, 16, 24)
    INNER_CIRCLE_COLOR = (0, 200, 255)   # Cyan
    OUTER_CIRCLE_COLOR = (0, 255, 0)     # Green
    TEXT_COLOR = (230, 230, 230)

    # Layout
    TARGET_SIZE = 512
    CAPTION_HEIGHT = 28
    CIRCLE_WIDTH = 1

    RAMP = np.array(
        [
            [0.0, 0, 0, 0],
            [0.35, 180, 20, 0],
            [0.7, 255, 160, 0],
            [1.0, 255, 255, 220],
        ]
    )

    def __init__(self, target_size: int = TARGET_SIZE, caption: bool = True):
        """
        Initialize the renderer.

        Args:
            target_size: Approximate edge length of the heat map in pixels
            caption: Draw a caption with time and radii under the map
        """
        self.target_size = target_size
        self.caption = caption
        self.font = None
        if caption:
            if not pygame.font.get_init():
                pygame.font.init()
            self.font = pygame.font.SysFont(None, 22)

    def colorize(self, values: np.ndarray) -> np.ndarray:
        """
        Map field values to RGB.

        Args:
            values: 2-D array indexed [i along x, j along y]

        Returns:
            uint8 array of shape values.shape + (3,)
        """
        peak = float(values.max())
        scaled = values / peak if peak > 0.0 else np.zeros_like(values)
        rgb = np.empty(values.shape + (3,), dtype=float)
        for channel in range(3):
            rgb[..., channel] = np.interp(scaled, self.RAMP[:, 0], self.RAMP[:, channel + 1])
        rgb[values <= 0.0] = self.BACKGROUND_COLOR
        return rgb.astype(np.uint8)

    def _pixel_scale(self, cells: int) -> int:
        return max(1, self.target_size // cells)

    def field_to_pixel(self, point: Tuple[float, float], grid) -> Tuple[int, int]:
        """Convert physical (x, y) to pixel coordinates on the heat map (y up)."""
        scale = self._pixel_scale(grid.cells_per_axis)
        size = grid.cells_per_axis * scale
        px = (point[0] + grid.half_width) / (2.0 * grid.half_width) * size
        py = (grid.half_width - point[1]) / (2.0 * grid.half_width) * size
        return int(round(px)), int(round(py))

    def draw_field(self, surface: pygame.Surface, field) -> None:
        scale = self._pixel_scale(field.grid.cells_per_axis)
        # surfarray is indexed [x, y] with y growing downwards
        pixels = self.colorize(field.values)[:, ::-1, :]
        small = pygame.surfarray.make_surface(pixels)
        size = field.grid.cells_per_axis * scale
        surface.blit(pygame.transform.scale(small, (size, size)), (0, 0))

    def draw_circles(self, surface: pygame.Surface, field, geometry) -> None:
        if geometry is None or geometry.extinct:
            return
        grid = field.grid
        centre = self.field_to_pixel((0.0, 0.0), grid)
        size = grid.cells_per_axis * self._pixel_scale(grid.cells_per_axis)
        per_unit = size / (2.0 * grid.half_width)
        for radius, color in ((geometry.r_in, self.INNER_CIRCLE_COLOR), (geometry.r_out, self.OUTER_CIRCLE_COLOR)):
            pixels = int(round(radius * per_unit))
            if pixels > self.CIRCLE_WIDTH:
                pygame.draw.circle(surface, color, centre, pixels, self.CIRCLE_WIDTH)

    def draw_caption(self, surface: pygame.Surface, field, geometry) -> None:
        if self.font is None:
            return
        text = f"t={field.time:.5f}  max={field.max_value():.4g}"
        if geometry is not None:
            text += f"  r_in={geometry.r_in:.4f}  r_out={geometry.r_out:.4f}"
        text_surface = self.font.render(text, True, self.TEXT_COLOR)
        surface.blit(text_surface, (6, surface.get_height() - self.CAPTION_HEIGHT + 6))

    def render_surface(self, field, geometry=None) -> pygame.Surface:
        """
        Draw a snapshot onto a new surface.

        Args:
            field: Cartesian snapshot
            geometry: Optional BoundaryGeometry whose circles are drawn

        Returns:
            The surface
        """
        cells = field.grid.cells_per_axis
        size = cells * self._pixel_scale(cells)
        height = size + (self.CAPTION_HEIGHT if self.font is not None else 0)
        surface = pygame.Surface((size, height))
        surface.fill(self.BACKGROUND_COLOR)
        self.draw_field(surface, field)
        self.draw_circles(surface, field, geometry)
        self.draw_caption(surface, field, geometry)
        return surface

    def render(self, field, geometry, path: Union[str, Path]) -> Path:
        """
        Render a snapshot and save it as PNG.

        Args:
            field: Cartesian snapshot
            geometry: BoundaryGeometry of the snapshot, or None
            path: Output file

        Returns:
            The written path
        """
        path = Path(path)
        pygame.image.save(self.render_surface(field, geometry), str(path))
        logger.debug("Rendered %s", path)
        return path
