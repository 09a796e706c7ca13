"""codat: keeps structured code comments consistent with the code.

The package scans source trees for labeled, hierarchical comments
(CS1, AS2.1, SP3 and friends), links each label to the code region it
describes, snapshots the result, and reports when later edits leave a
comment stale.  An optional checker asks a language-model backend
whether comment and code still agree.
"""

from .config import (
    BackendConfig,
    CodatConfig,
    PatternConfig,
    SyntaxProfile,
    load_config,
)
from .engine import FileScan, ProjectScan, scan_project, scan_source
from .errors import CodatError
from .linker import fingerprint, infer_code_region
from .model import (
    Anchor,
    Clause,
    CodeLink,
    CommentNode,
    CommentRecord,
    CommentTree,
    Diagnostic,
    Label,
    Snapshot,
    SourceRange,
    Verdict,
)
from .parser import build_tree, extract_comments, parse_clauses, parse_label
from .tracker import (
    acknowledge,
    diff,
    load_snapshot,
    reanchor,
    take_snapshot,
    watch,
)

__version__ = "0.1.0"

__all__ = [
    "Anchor",
    "BackendConfig",
    "Clause",
    "CodatConfig",
    "CodatError",
    "CodeLink",
    "CommentNode",
    "CommentRecord",
    "CommentTree",
    "Diagnostic",
    "FileScan",
    "Label",
    "PatternConfig",
    "ProjectScan",
    "Snapshot",
    "SourceRange",
    "SyntaxProfile",
    "Verdict",
    "__version__",
    "acknowledge",
    "build_tree",
    "diff",
    "extract_comments",
    "fingerprint",
    "infer_code_region",
    "load_config",
    "load_snapshot",
    "parse_clauses",
    "parse_label",
    "reanchor",
    "scan_project",
    "scan_source",
    "take_snapshot",
    "watch",
]
