"""Semi-automatic labeling toolkit for gram-stained bacterial micrographs."""

from .clustering import ClusterModel, assignment_to_mask, kmeans_rgb, select_foreground_clusters, wcss_of
from .imaging import BinaryMask, GrayImage, Histogram256, RasterImage, histogram, load_image, overlay, save_png, to_grayscale
from .labels import LabelMap, load_label, mask_to_label, save_label
from .metrics import ConfusionCounts, MetricsRow, accuracy, confusion, f1, iou, macro_average, precision, recall, table_report
from .morphology import StructuringElement, close, dilate, disk_kernel, erode, open_
from .patching import Patch, PatchSet, augment, extract_patches
from .pipeline import (DatasetManifest, ManifestEntry, SpeciesConfig, annotate_image,
                       batch_annotate, export_label, ingest_dibas, split_dataset)
from .thresholding import OtsuResult, apply_threshold, otsu_threshold

__version__ = "0.1.0"
