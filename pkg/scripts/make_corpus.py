"""Write the synthetic example corpus (traces + fit configs) to configs/corpus."""

import sys
from pathlib import Path

from omx.corpus import build_corpus

if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "configs" / "corpus"
    for p in build_corpus(target):
        print("wrote", p)
