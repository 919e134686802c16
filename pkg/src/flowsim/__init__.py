"""flowsim: shape-based flowchart figure retrieval and plagiarism ranking.

The pipeline binarizes a figure, thins it, erodes away flow lines and text,
classifies the surviving closed outlines by their radial-distance signature,
and summarizes the figure as four shape counts. A database of such vectors
is ranked against a query vector with cosine similarity.
"""

from .classify import (
    ClassifierConfig,
    FeatureVector,
    FlowchartRole,
    ShapeClass,
    ShapeRatios,
    classify,
    compute_ratios,
    extract_feature_vector,
    fill_outline,
    role_of,
)
from .contour import (
    CannyConfig,
    ChainCode,
    ShapeMeasurement,
    canny_edges,
    measure_shape,
    trace_boundary,
)
from .index import (
    FigureRecord,
    MetadataDatabase,
    add_figure,
    get_figure,
    index_directory,
    load_index,
    save_index,
)
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .preprocess import (
    PreprocessConfig,
    PreprocessReport,
    preprocess,
    remove_open_strokes,
    remove_text,
    thin,
)
from .raster import (
    PNG_SUPPORTED,
    BinaryImage,
    ConnectedComponent,
    Connectivity,
    GrayImage,
    binarize,
    binary_to_gray,
    decode_image,
    encode_pgm,
    label_components,
    otsu_threshold,
)
from .search import (
    QueryReport,
    QueryVector,
    RankedMatch,
    SearchConfig,
    build_query_vector,
    cosine_similarity,
    plagiarism_percentage,
    query,
    rank,
)
from .synth import (
    CorpusConstraints,
    EdgeSpec,
    GroundTruth,
    Lcg,
    NodeSpec,
    NodeTruth,
    generate_corpus,
    generate_flowchart_layout,
    render,
    sample_node_size,
    single_node_layout,
)

__version__ = "0.1.0"
