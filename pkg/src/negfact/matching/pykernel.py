"""Pure-Python phrase-matching kernel.

This is the reference implementation of the hot inner loop shared with the
compiled extension in _speedups.pyx: a left-to-right, longest-match-first
scan of a token-id sequence against a compiled trigger table.  Both
kernels must stay behaviorally identical; tests/test_matching.py checks
them against each other and against a brute-force oracle.

Trigger table layout (shared with the C kernel):
  flat[offsets[t]:offsets[t+1]]  token ids of trigger t's phrase
  unordered[t]                   1 if the phrase may match permuted
  windows[t]                     max extent a match of t may span
  ranks[t]                       tie-break rank, smaller wins on equal extent

A match of an unordered trigger is the shortest extent, starting at a
token that belongs to the phrase, whose tokens contain the phrase as a
sub-multiset, capped at windows[t] tokens.  Token id -1 marks a token
unknown to the trigger vocabulary; it can fill a gap inside an unordered
extent but never satisfies a phrase token.
"""

from __future__ import annotations

from typing import Sequence


def match_extent_at(
    ids: Sequence[int],
    pos: int,
    phrase: Sequence[int],
    unordered: bool,
    window: int,
) -> int:
    """Extent (token count) of a match at `pos`, or 0 when there is none."""
    n = len(ids)
    k = len(phrase)
    if k == 0 or pos + k > n:
        return 0
    if not unordered:
        for j in range(k):
            if ids[pos + j] != phrase[j]:
                return 0
        return k

    # Shortest sub-multiset extent, anchored on a phrase token at pos.
    uniq: list[int] = []
    need: list[int] = []
    for token in phrase:
        for i, u in enumerate(uniq):
            if u == token:
                need[i] += 1
                break
        else:
            uniq.append(token)
            need.append(1)

    limit = min(window, n - pos)
    remaining = k
    for j in range(limit):
        token = ids[pos + j]
        for i, u in enumerate(uniq):
            if u == token and need[i] > 0:
                need[i] -= 1
                remaining -= 1
                break
        else:
            if j == 0:
                return 0
        if remaining == 0:
            return j + 1
    return 0


def find_matches(
    ids: Sequence[int],
    offsets: Sequence[int],
    flat: Sequence[int],
    unordered: Sequence[int],
    windows: Sequence[int],
    ranks: Sequence[int],
) -> list[tuple[int, int, int]]:
    """Scan left to right keeping maximal non-overlapping matches.

    Returns (trigger_index, start, end) token ranges.  At each position the
    longest extent wins; equal extents fall to the smaller rank.
    """
    n_triggers = len(offsets) - 1
    phrases = [list(flat[offsets[t] : offsets[t + 1]]) for t in range(n_triggers)]

    # A match at pos always starts on one of the trigger's phrase tokens,
    # so only triggers anchored on ids[pos] need testing there.
    anchored: dict[int, list[int]] = {}
    for t, phrase in enumerate(phrases):
        anchors = phrase if unordered[t] else phrase[:1]
        for token in anchors:
            bucket = anchored.setdefault(token, [])
            if not bucket or bucket[-1] != t:
                bucket.append(t)

    matches: list[tuple[int, int, int]] = []
    pos = 0
    n = len(ids)
    while pos < n:
        best_extent = 0
        best_rank = -1
        best_trigger = -1
        for t in anchored.get(ids[pos], ()):
            extent = match_extent_at(ids, pos, phrases[t], bool(unordered[t]), windows[t])
            if extent == 0:
                continue
            if extent > best_extent or (extent == best_extent and ranks[t] < best_rank):
                best_extent = extent
                best_rank = ranks[t]
                best_trigger = t
        if best_trigger >= 0:
            matches.append((best_trigger, pos, pos + best_extent))
            pos += best_extent
        else:
            pos += 1
    return matches
