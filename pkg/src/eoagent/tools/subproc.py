"""One-shot subprocess invocation of external tools.

Request goes to the child's stdin as a single JSON document
``{"tool": name, "args": [Value]}``; the response comes back on stdout
as ``{"status": "ok", "value": Value}`` or ``{"status": "error",
"message": ...}``. Exit status 0 is required for an "ok" response.
"""

from __future__ import annotations

import json
import subprocess
import tempfile

from .errors import MalformedToolOutput, ToolCrashed, ToolExecutionError, ToolTimeout
from .spec import ExternalBinding
from .values import decode_value, encode_value


def run_external(binding: ExternalBinding, tool_name: str, args: list):
    with tempfile.TemporaryDirectory(prefix="eoagent_tool_") as tmp:
        request = json.dumps({"tool": tool_name, "args": encode_value(list(args), tmp, "arg")})
        try:
            proc = subprocess.run(
                list(binding.cmd),
                input=request.encode(),
                capture_output=True,
                timeout=binding.timeout_s,
            )
        except subprocess.TimeoutExpired:
            raise ToolTimeout(
                f"tool {tool_name!r} exceeded {binding.timeout_s}s"
            ) from None
        except OSError as exc:
            raise ToolCrashed(-1, f"cannot spawn {binding.cmd[0]!r}: {exc}") from exc

        stdout = proc.stdout.decode(errors="replace").strip()
        try:
            response = json.loads(stdout) if stdout else None
        except json.JSONDecodeError:
            response = None

        if isinstance(response, dict) and response.get("status") == "error":
            raise ToolExecutionError(str(response.get("message", "tool failed")))
        if proc.returncode != 0:
            raise ToolCrashed(proc.returncode, proc.stderr.decode(errors="replace")[:500].strip())
        if not isinstance(response, dict) or response.get("status") != "ok":
            raise MalformedToolOutput(
                f"tool {tool_name!r} wrote an unrecognized response: {stdout[:200]!r}"
            )
        # decoding loads referenced sidecars into memory before tmp vanishes
        return decode_value(response.get("value"))
