from iirnn.baselines.base import SessionRecommender, pad_with
from iirnn.baselines.bpr import BprConfig, BprMf
from iirnn.baselines.knn import ItemKnn
from iirnn.baselines.popular import MostPopular, PopularityTable
from iirnn.baselines.recent import MostRecent

__all__ = [
    "BprConfig",
    "BprMf",
    "ItemKnn",
    "MostPopular",
    "MostRecent",
    "PopularityTable",
    "SessionRecommender",
    "pad_with",
]
