from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    """Network dimensions and feature switches.  ``proj_dim`` (width of the
    word/POS projection used when the BiLSTM is off) is chosen so the head
    vector is 200-wide with or without the BiLSTM."""

    word_dim: int = 100
    pos_dim: int = 25
    rel_dim: int = 25
    tree_dim: int = 200
    tree_layers: int = 2
    bilstm_dim: int = 100
    bilstm_layers: int = 2
    proj_dim: int = 200
    hidden_u: int = 100
    hidden_l: int = 100
    window: int = 2
    use_bilstm: bool = True
    use_pos: bool = True
    use_tree: bool = True
    labeled: bool = True

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.type == "int" and (not isinstance(v, int) or isinstance(v, bool) or v <= 0):
                raise ConfigError(f"{f.name} must be a positive integer, got {v!r}")

    @property
    def word_vec_dim(self) -> int:
        """Width of v_i, the head vector fed to the tree LSTMs."""
        return 2 * self.bilstm_dim if self.use_bilstm else self.proj_dim

    @property
    def enc_dim(self) -> int:
        return self.word_vec_dim

    @property
    def node_dim(self) -> int:
        """Width of a pending item's c vector."""
        return 2 * self.tree_dim if self.use_tree else self.word_vec_dim

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**_checked(cls, d))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    seed: int = 1
    p_aug: float = 0.1
    margin: float = 1.0
    word_dropout: float = 0.25
    batch_errors: int = 50
    learning_rate: float = 0.001
    explore: bool = True
    dynamic_oracle: bool = True
    follow_gold_with_p_aug: bool = False

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if not 0.0 <= self.p_aug <= 1.0:
            raise ConfigError(f"p_aug must lie in [0, 1], got {self.p_aug}")
        if self.word_dropout < 0:
            raise ConfigError("word_dropout must be >= 0")
        if self.batch_errors < 1:
            raise ConfigError("batch_errors must be >= 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**_checked(cls, d))


def _checked(cls, d: dict) -> dict:
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {', '.join(unknown)}")
    return d
