# Copyright 2026 The vjf Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.

"""
Prepends the license header to every Python file under `src`, `test` and `bin`, and to the
Python files at the repository root. Files that already start with the header are left alone.

Usage, from the repository root:

    python bin/apply-header.py            # apply
    python bin/apply-header.py --check    # list files without the header, exit 1 if any
"""

import argparse
import sys
from pathlib import Path
from typing import Iterator, List

HEADER_SOURCE = Path(__file__).resolve()
ROOT_DIRS = ["src", "test", "bin"]


def read_header() -> str:
    """The header is the leading comment block of this script."""
    lines = []
    for line in HEADER_SOURCE.read_text().splitlines(keepends=True):
        if not line.startswith("#"):
            break
        lines.append(line)
    return "".join(lines) + "\n"


def python_files(root: Path) -> Iterator[Path]:
    yield from sorted(root.glob("*.py"))
    for directory in ROOT_DIRS:
        yield from sorted((root / directory).rglob("*.py"))


def missing_header(root: Path, header: str) -> List[Path]:
    return [path for path in python_files(root) if not path.read_text().startswith(header)]


def main() -> int:
    parser = argparse.ArgumentParser(description="Apply or check the license header.")
    parser.add_argument("--check", action="store_true", help="only report missing headers")
    args = parser.parse_args()
    header = read_header()
    missing = missing_header(Path.cwd(), header)
    for path in missing:
        if args.check:
            print(f"Missing header: {path}")
        else:
            print(f"Applying header to {path}...")
            path.write_text(header + path.read_text())
    return 1 if args.check and missing else 0


if __name__ == "__main__":
    sys.exit(main())
