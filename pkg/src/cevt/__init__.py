"""cevt: color event camera simulation and color video reconstruction.

The package simulates a color event camera (an RGBG Bayer filter in
front of a per-pixel contrast-threshold event generator) and turns the
resulting color event streams back into continuous-time color video,
either with a per-pixel high-pass filter followed by demosaicing, or by
reconstructing each Bayer channel independently at quarter resolution
and fusing the upsampled channels.  It also builds the spatio-temporal
voxel-grid tensors consumed by learned reconstruction networks.
"""

from .events import (BayerPattern, ColorChannel, Event, EventStream, Frame,
                     channel_of, to_quarter)
from .simulate import (PixelSimState, SimConfig, mosaic, safe_log, simulate,
                       simulate_pixel_interval)
from .filters import (HFParams, HighPassState, IntegrationParams, RATE_TAU_S,
                      bilateral_5x5, hf_reconstruct, hf_sample, hf_update,
                      integrate_sampled, integrate_windows)
from .colorpipe import (ChannelStreams, align_channels, demosaic_bilinear,
                        fuse_rgb, reconstruct_color_quarter, split_by_channel,
                        upsample_bicubic)
from .voxels import (VoxelGrid, batch_events, read_voxel_grid, voxelize,
                     write_voxel_grid)
from .io_formats import (Config, parse_config, read_events, read_frames,
                         read_image, write_events, write_frames, write_image)
from .errors import CevtError, ConfigError, FormatError, InputError

__version__ = "0.1.0"

__all__ = [
    "BayerPattern", "ColorChannel", "Event", "EventStream", "Frame",
    "channel_of", "to_quarter",
    "PixelSimState", "SimConfig", "mosaic", "safe_log", "simulate",
    "simulate_pixel_interval",
    "HFParams", "HighPassState", "IntegrationParams", "RATE_TAU_S",
    "bilateral_5x5", "hf_reconstruct", "hf_sample", "hf_update",
    "integrate_sampled", "integrate_windows",
    "ChannelStreams", "align_channels", "demosaic_bilinear", "fuse_rgb",
    "reconstruct_color_quarter", "split_by_channel", "upsample_bicubic",
    "VoxelGrid", "batch_events", "read_voxel_grid", "voxelize",
    "write_voxel_grid",
    "Config", "parse_config", "read_events", "read_frames", "read_image",
    "write_events", "write_frames", "write_image",
    "CevtError", "ConfigError", "FormatError", "InputError",
]
