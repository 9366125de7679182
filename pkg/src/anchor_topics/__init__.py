"""Anchor-word topic modeling: SoftClique and FastAnchorWords anchor selection,
exponentiated-gradient topic recovery and UMass coherence."""
from .anchors import (AnchorSet, FawParams, RankDeficiencyError, SoftCliqueParams, clique_weight,
                      fast_anchor_words, local_search, merge_init, soft_clique, total_weight)
from .cooccurrence import (CooccurrenceMatrix, DegenerateMatrixError, RowNormalizedQ, SimilarityGraph,
                           SyntheticModel, build_q, generate_synthetic, row_normalize, separable_q,
                           to_similarity_graph)
from .corpus import (Corpus, CorpusError, CorpusFormatError, CorpusIndexError, DegenerateCorpusError,
                     PreprocessConfig, TruncatedCorpusError, default_stopwords, doc_frequency, load_uci,
                     load_uci_files, preprocess, preset_config, write_uci)
from .evaluation import (CoherenceParams, CoherenceReport, DocCooccurrenceCounts, average_coherence,
                         count_cooccurrence, top_words, topic_coherence)
from .recovery import (DegenerateTopicError, EgParams, ReconstructionCoefficients, TopicModel,
                       eg_simplex_lsq, recover_a, recover_c, recover_topics)
from .matrix_io import MatrixFormatError, read_matrix, write_matrix

__version__ = "0.1.0"
