"""Writers for the model, automaton, and game text formats.

Model serialization uses shortest exact float representations so that
parse -> serialize -> parse is the structural identity.
"""

from __future__ import annotations

from .model import Bmdp, Mdp, StochasticGame
from .product import Dra, LabelledBmdp


def _fmt(x: float) -> str:
    return repr(float(x))


def _rabin_lines(model, out: list[str]) -> None:
    for pair in model.acceptance:
        fin = " ".join(model.state_names[s] for s in sorted(pair.fin))
        inf = " ".join(model.state_names[s] for s in sorted(pair.inf))
        out.append(f"rabin {{ {fin} }} {{ {inf} }}".replace("  ", " "))


def model_to_text(model: Bmdp | LabelledBmdp) -> str:
    """Serialize an interval model in the input grammar."""
    labelled = isinstance(model, LabelledBmdp)
    out = ["labelled-bmdp" if labelled else "bmdp"]
    out.append("states " + " ".join(model.state_names))
    out.append("init " + model.state_names[model.initial])
    if labelled:
        for s, letter in enumerate(model.labels):
            out.append(f"label {model.state_names[s]} {letter}")
    for s in range(model.n_states):
        for a in model.available[s]:
            out.append(f"action {model.state_names[s]} {model.action_names[a]}")
            row = model.rows[a]
            for succ in row.successors:
                iv = row.bounds[succ]
                out.append(
                    f"  to {model.state_names[succ]} [{_fmt(iv.lo)}, {_fmt(iv.hi)}]"
                )
    if not labelled:
        _rabin_lines(model, out)
    return "\n".join(out) + "\n"


def mdp_to_text(mdp: Mdp) -> str:
    """Serialize a point MDP as a model with point intervals."""
    out = ["bmdp"]
    out.append("states " + " ".join(mdp.state_names))
    out.append("init " + mdp.state_names[mdp.initial])
    for s in range(mdp.n_states):
        for a in mdp.available[s]:
            out.append(f"action {mdp.state_names[s]} {mdp.action_names[a]}")
            for succ in sorted(mdp.dists[a]):
                p = _fmt(mdp.dists[a][succ])
                out.append(f"  to {mdp.state_names[succ]} [{p}, {p}]")
    _rabin_lines(mdp, out)
    return "\n".join(out) + "\n"


def dra_to_text(dra: Dra) -> str:
    """Serialize an automaton in the input grammar."""
    out = ["dra"]
    out.append("alphabet " + " ".join(dra.alphabet))
    out.append("states " + " ".join(dra.state_names))
    out.append("init " + dra.state_names[dra.initial])
    for s in range(dra.n_states):
        for letter in dra.alphabet:
            out.append(f"trans {dra.state_names[s]} {letter} "
                       f"{dra.state_names[dra.trans[(s, letter)]]}")
    for pair in dra.acceptance:
        fin = " ".join(dra.state_names[s] for s in sorted(pair.fin))
        inf = " ".join(dra.state_names[s] for s in sorted(pair.inf))
        out.append(f"rabin {{ {fin} }} {{ {inf} }}".replace("  ", " "))
    return "\n".join(out) + "\n"


def game_to_text(game: StochasticGame) -> str:
    """Human-readable dump of an explicit stochastic game."""
    mdp = game.mdp
    out = ["game"]
    out.append("states " + " ".join(mdp.state_names))
    out.append("init " + mdp.state_names[mdp.initial])
    for s in range(mdp.n_states):
        out.append(f"owner {mdp.state_names[s]} {game.owner[s]}")
    for s in range(mdp.n_states):
        for a in mdp.available[s]:
            out.append(f"action {mdp.state_names[s]} {mdp.action_names[a]}")
            for succ in sorted(mdp.dists[a]):
                out.append(
                    f"  to {mdp.state_names[succ]} [{_fmt(mdp.dists[a][succ])}]"
                )
    _rabin_lines(mdp, out)
    return "\n".join(out) + "\n"
