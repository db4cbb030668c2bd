"""Parameterized model checker for global synchronization protocols.

A protocol describes one finite-state process template; a system runs n
identical copies that move in global, synchronized steps (k designated
senders, everyone else reacts as a receiver). Because processes are
anonymous, a global state is just a vector counting processes per local
state, and reachability questions of the form "can at least m processes
sit in state s at once, for *some* system size n" become coverability
questions over those vectors.

The package provides:

- a validated protocol model with desugaring of derived primitives
  (`gspmc.model`),
- forward counter semantics (`gspmc.semantics`) and an explicit-state
  checker for fixed n (`gspmc.explicit`),
- the parameterized backward-reachability engine over upward-closed sets
  (`gspmc.wsts`),
- syntactic guard-compatibility certification (`gspmc.wellbehaved`) and
  cutoff conditions (`gspmc.cutoff`),
- a JSON model-file format and command-line front end (`gspmc.modelfile`,
  `gspmc.cli`).
"""

from gspmc.model import Protocol, ValidationError, validate

__all__ = ["Protocol", "ValidationError", "validate"]
