#!/usr/bin/env python3
"""Prepend the Apache-2.0 header to project sources that lack it."""

import pathlib
import sys

HEADER = """Copyright 2026 The lindmag Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""

ROOTS = ["include", "src", "tests", "tools", "bench", "scripts"]
SLASH = {".cpp", ".hpp", ".h", ".cc"}
HASH = {".py", ".cmake"}


def commented(prefix):
    lines = [(prefix + " " + l).rstrip() for l in HEADER.splitlines()]
    return "\n".join(lines) + "\n\n"


def process(path):
    text = path.read_text()
    if "Licensed under the Apache License" in text[:1000]:
        return False
    if path.suffix in SLASH:
        out = commented("//") + text
    else:
        shebang = ""
        if text.startswith("#!"):
            shebang, _, text = text.partition("\n")
            shebang += "\n"
        out = shebang + commented("#") + text
    path.write_text(out)
    return True


def main(root):
    root = pathlib.Path(root)
    files = [root / "CMakeLists.txt"]
    for r in ROOTS:
        for p in sorted((root / r).rglob("*")):
            if p.is_file() and (p.suffix in SLASH or p.suffix in HASH):
                files.append(p)
    changed = [str(p.relative_to(root)) for p in files if process(p)]
    print(f"headers added to {len(changed)} files")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parent.parent)
