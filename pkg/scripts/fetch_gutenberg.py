#!/usr/bin/env python3
"""Download the six benchmark texts from Project Gutenberg into data/gutenberg/.

Needs network access; run once on a connected machine. Each ebook is tried
at the usual mirror paths until one answers.
"""

import sys
import urllib.error
import urllib.request
from pathlib import Path

BOOKS = {
    # name -> Project Gutenberg ebook id
    "alice": 11,            # Alice's Adventures in Wonderland, Lewis Carroll
    "gulliver": 829,        # Gulliver's Travels, Jonathan Swift
    "odyssey": 1727,        # The Odyssey, Samuel Butler's prose translation
    "paradise_lost": 26,    # Paradise Lost, John Milton
    "task": 3698,           # The Task and other poems, William Cowper
    "ulysses": 4300,        # Ulysses, James Joyce
}

CANDIDATE_URLS = (
    "https://www.gutenberg.org/files/{id}/{id}-0.txt",
    "https://www.gutenberg.org/cache/epub/{id}/pg{id}.txt",
    "https://www.gutenberg.org/files/{id}/{id}.txt",
)


def fetch(book_id: int) -> str:
    last = None
    for template in CANDIDATE_URLS:
        url = template.format(id=book_id)
        try:
            with urllib.request.urlopen(url, timeout=60) as resp:
                raw = resp.read()
            print(f"  {url}")
            return raw.decode("utf-8-sig", errors="replace")
        except (urllib.error.URLError, OSError) as exc:
            last = exc
    raise SystemExit(f"could not fetch ebook {book_id}: {last}")


def main() -> int:
    out_dir = Path(__file__).resolve().parent.parent / "data" / "gutenberg"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, book_id in BOOKS.items():
        dest = out_dir / f"{name}.txt"
        if dest.exists():
            print(f"{name}: already present, skipping")
            continue
        print(f"{name}: fetching ebook {book_id}")
        text = fetch(book_id)
        dest.write_text(text, encoding="utf-8", newline="\n")
        print(f"  wrote {dest} ({len(text):,} chars)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
