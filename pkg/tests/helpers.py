"""Shared test helpers: explorer page template and seeded-source builder."""

import html

PAGE_TEMPLATE = """<!DOCTYPE html>
<html>
<head><title>Contract @ADDRESS@</title></head>
<body>
<h1>Verified contract @ADDRESS@</h1>
<div id="contract-source"><pre>@SOURCE@</pre></div>
<div id="contract-abi"><pre>@ABI@</pre></div>
<div id="contract-bytecode"><pre>@BYTECODE@</pre></div>
</body>
</html>
"""


def render_page(address: str, source: str, abi: str, bytecode: str) -> str:
    """Wrap artifacts in the fixture explorer's page shape, entity-escaped."""
    return (PAGE_TEMPLATE
            .replace("@ADDRESS@", address)
            .replace("@SOURCE@", html.escape(source))
            .replace("@ABI@", html.escape(abi))
            .replace("@BYTECODE@", html.escape(bytecode)))


def make_seed_source(tag: str, functions: int = 0, events: int = 0,
                     modifiers: int = 0, payable: int = 0) -> str:
    """Solidity source analyzing to exactly the requested counts.

    payable is included in functions; mapping and addressVars stay 0.
    """
    assert payable <= functions
    lines = [
        "pragma solidity ^0.5.0;",
        f"// seeded corpus fixture {tag}",
        "contract Seeded {",
    ]
    for i in range(events):
        lines.append(f"    event E{i}();")
    for i in range(modifiers):
        lines.append(f"    modifier m{i}() {{ _; }}")
    for i in range(payable):
        lines.append(f"    function p{i}() public payable {{}}")
    for i in range(functions - payable):
        lines.append(f"    function f{i}() public {{}}")
    lines.append("}")
    return "\n".join(lines) + "\n"
