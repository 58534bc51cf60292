"""Prefix beam search with shallow n-gram fusion.

The beam keeps collapsed prefixes, merging every alignment that lands on
the same prefix.  When a separator completes a word, the word's ARPA
log10 step (converted to nats) joins the score with weight alpha1, plus a
flat word score alpha2.  A language model that knows "ab" is a real word
can rescue it from an acoustically ambiguous second letter.
"""

import io

import numpy as np

from ctcrelax import (
    DecodeConfig,
    Vocabulary,
    beam_search_decode,
    greedy_decode,
    log_softmax,
    parse_arpa,
)

vocab = Vocabulary(tokens=("<blank>", "<sep>", "a", "b"), blank_index=0, separator_index=1)

# A 2-gram model over the two words this alphabet can spell cheaply.
ARPA = """\\data\\
ngram 1=5
ngram 2=3

\\1-grams:
-99\t<s>\t-0.30103
-0.69897\t</s>
-0.39794\tab\t-0.30103
-1.30103\taa
-1.30103\t<unk>

\\2-grams:
-0.15490\t<s> ab
-0.39794\tab </s>
-0.69897\tab ab

\\end\\
"""
lm = parse_arpa(io.StringIO(ARPA))

# Three frames: certain "a", then an ambiguous second letter that leans
# "a" (0.55 vs 0.45), then near-certain blank.
frames = np.array(
    [
        [0.01, 0.01, 0.97, 0.01],
        [0.015, 0.015, 0.55, 0.42],
        [0.93, 0.01, 0.03, 0.03],
    ]
)
logprobs = log_softmax(np.log(frames))

print("greedy decode:", vocab.render(greedy_decode(logprobs, vocab.blank_index)))

# Without the LM the beam agrees with the acoustics and outputs "aa".
plain = beam_search_decode(logprobs, vocab, None, DecodeConfig(beam_width=16))
print("\nno LM:")
for tokens, score in plain[:3]:
    print(f"  {vocab.render(tokens)!r:10} {score:8.3f}")

# With fusion the "ab" unigram advantage outweighs the small acoustic gap.
fused = beam_search_decode(
    logprobs, vocab, lm, DecodeConfig(beam_width=16, lm_weight=1.0, word_score=0.5)
)
print("\nLM-fused (alpha1=1.0, alpha2=0.5):")
for tokens, score in fused[:3]:
    print(f"  {vocab.render(tokens)!r:10} {score:8.3f}")

# The word score alone biases segmentation: a strongly positive alpha2
# prefers to break the same letters into more words.
segmented = beam_search_decode(
    logprobs, vocab, None, DecodeConfig(beam_width=16, word_score=4.0)
)
print("\nword-score heavy (alpha2=4):")
for tokens, score in segmented[:3]:
    print(f"  {vocab.render(tokens)!r:10} {score:8.3f}")
