"""Caption and image classifiers plus the bimodal fusion stacker."""

from __future__ import annotations

from ..embeddings import EmbeddingTable
from ..errors import DataFormatError
from ..persist import load_container
from .bow import BowVectorizer, BowVocab, bow_vectorize, build_bow_vocab
from .cnn import CnnParams, HsvCnnClassifier, cnn_grad_check, cnn_train
from .ffnn import (
    BowFfnnClassifier,
    MlpClassifier,
    Word2vecFfnnClassifier,
    ffnn_w2v_predict,
    ffnn_w2v_train,
)
from .fusion import (
    BimodalFusionClassifier,
    FusionStacker,
    fusion_predict,
    fusion_train,
)
from .image import (
    IMAGE_SIZE,
    bilinear_resize,
    hsv_from_image,
    load_hsv_input,
    load_image_rgb,
    read_hsv_tensor,
    rgb_to_hsv,
    write_hsv_tensor,
)
from .naive_bayes import MultinomialNaiveBayes, nb_predict, nb_train

__all__ = [
    "BowVectorizer",
    "BowVocab",
    "bow_vectorize",
    "build_bow_vocab",
    "CnnParams",
    "HsvCnnClassifier",
    "cnn_grad_check",
    "cnn_train",
    "BowFfnnClassifier",
    "MlpClassifier",
    "Word2vecFfnnClassifier",
    "ffnn_w2v_predict",
    "ffnn_w2v_train",
    "BimodalFusionClassifier",
    "FusionStacker",
    "fusion_predict",
    "fusion_train",
    "IMAGE_SIZE",
    "bilinear_resize",
    "hsv_from_image",
    "load_hsv_input",
    "load_image_rgb",
    "read_hsv_tensor",
    "rgb_to_hsv",
    "write_hsv_tensor",
    "MultinomialNaiveBayes",
    "nb_predict",
    "nb_train",
    "load_model",
]

_LOADERS = {
    "naive-bayes": MultinomialNaiveBayes.load,
    "ffnn-bow": BowFfnnClassifier.load,
    "cnn-hsv": HsvCnnClassifier.load,
    "fusion-bimodal": BimodalFusionClassifier.load,
}


def load_model(path, table: EmbeddingTable | None = None):
    """Open any saved classifier, dispatching on the container kind.

    Embedding-based models do not serialize their table; pass the
    ``table`` they were trained with.
    """
    header, _ = load_container(path)
    kind = header.get("kind")
    if kind == "ffnn-w2v":
        if table is None:
            raise ValueError(
                f"{path} holds an embedding-based model; "
                "pass the embedding table it was trained with"
            )
        return Word2vecFfnnClassifier.load(path, table)
    try:
        loader = _LOADERS[kind]
    except KeyError:
        raise DataFormatError(
            f"{path}: unknown model kind {kind!r} "
            f"(expected one of {sorted(_LOADERS) + ['ffnn-w2v']})"
        ) from None
    return loader(path)
