"""Party-specific extractive contract summarization toolkit.

Pipeline: segment and filter contract sentences (corpus), assign deontic
categories per party (categorize), collect best-worst importance judgments
(bws + annotsvc), aggregate them into Bradley-Terry rankings (btrank), rank
candidate sets with baseline or model rankers (rankers), and assemble and
evaluate category-clustered summaries (pipeline).
"""

__version__ = "0.1.0"

from . import btrank, bws, categorize, corpus, errors, pipeline, rankers  # noqa: F401
