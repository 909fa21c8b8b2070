"""Sign conventions threaded through the whole complex.

Every switch is independently flippable; flipping any single one breaks at
least one identity of the structure suite (the mutation tests assert this).
Normal configurations never touch these — they are reachable only through an
explicit unsafe override, and the assembly path re-checks D∘D = 0 so a
corrupted convention is reported with the violated identity as a witness.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class SignConventions:
    rho_diag: int = 1           # connection covector on its own group block
    rho_off: int = -1           # connection covector on the following block
    anchor_sign: int = 1        # anchor column inside ρ_0 and the φ-dual
    phi_level_sign: bool = True    # (−1)^n level sign on φ
    derham_level_sign: bool = True  # (−1)^n level sign on d
    contraction_sign: int = -1  # ι = contraction_sign · Σ_{i<j} (−1)^i ι_i^* 𝔏_j
    cech_alternation: int = 1   # ∂ = cech_alternation · Σ_q (−1)^q π̂_q^*
    cup_parity: int = 0         # extra parity added to the cup sign exponent
    transport_eps: int = 1      # frame transport of base coframes on 0-faces
    transport_ups: int = 1      # frame transport of the vertical frame on 0-faces

    def flipped(self, name: str) -> "SignConventions":
        current = getattr(self, name)
        if isinstance(current, bool):
            return replace(self, **{name: not current})
        if name == "cup_parity":
            return replace(self, cup_parity=1 - current)
        return replace(self, **{name: -current})


DEFAULT_SIGNS = SignConventions()

SWITCH_NAMES = (
    "rho_diag",
    "rho_off",
    "anchor_sign",
    "phi_level_sign",
    "derham_level_sign",
    "contraction_sign",
    "cech_alternation",
    "cup_parity",
    "transport_eps",
    "transport_ups",
)
