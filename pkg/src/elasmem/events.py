"""Append-only event log used by the correctness oracles and CSV export.

Every structurally significant transition in the engine (split, merge,
allocation, reclaim, per-page store/restore, watermark flips, DMAR traps,
upgrade cut points) lands here as a flat tuple. Tests replay the log to
check exactly-once and ordering properties; simctl drains it to
events.csv. Appends must stay cheap: they sit on the fault path.
"""

import itertools

# event kinds
SPLIT = "split"
MERGE = "merge"
MS_ALLOC = "ms_alloc"
MS_RECLAIM = "ms_reclaim"
MS_POPULATE = "ms_populate"
MP_STORE = "mp_store"
MP_RESTORE = "mp_restore"
SWAP_OUT_BEGIN = "swap_out_begin"
SWAP_OUT_END = "swap_out_end"
CANCEL = "cancel"
REQ_CREATE = "req_create"
REQ_RETIRE = "req_retire"
WATERMARK = "watermark"
OOM = "oom"
DMAR = "dmar"
DMA_VIOLATION = "dma_violation"
DMA_REGISTER = "dma_register"
DMA_UNREGISTER = "dma_unregister"
OP_BEGIN = "op_begin"
OP_END = "op_end"
UPGRADE_COMMIT_BEGIN = "upgrade_commit_begin"
UPGRADE_COMMIT_DONE = "upgrade_commit_done"

#: kinds emitted once per MP; disabled by default on huge accounting runs
PER_PAGE_KINDS = frozenset({MP_STORE, MP_RESTORE})


class EventLog:
    """Thread-safe under the GIL: list.append and counter bumps are atomic."""

    def __init__(self, clock=None, record_per_page=True):
        self._seq = itertools.count()
        self._clock = clock or (lambda: 0)
        self.rows = []
        self._skip = frozenset() if record_per_page else PER_PAGE_KINDS

    def emit(self, kind, gfn=-1, mp=-1, data=None):
        if kind in self._skip:
            return -1
        seq = next(self._seq)
        self.rows.append((seq, self._clock(), kind, gfn, mp, data))
        return seq

    def __len__(self):
        return len(self.rows)

    def of_kind(self, *kinds):
        want = set(kinds)
        return [r for r in self.rows if r[2] in want]

    def count(self, kind, gfn=None, mp=None):
        n = 0
        for r in self.rows:
            if r[2] == kind and (gfn is None or r[3] == gfn) \
                    and (mp is None or r[4] == mp):
                n += 1
        return n

    def clear(self):
        self.rows.clear()
