"""chatqe: builds labeled bilingual chat-translation corpora, trains and
evaluates an erroneous-translation detector, and serves a chat relay that
warns both participants about suspect translations.
"""

__version__ = "1.0.0"
