"""Small image classifiers with explicit layer-granularity units.

Granularity follows the analysis convention: a residual building block
counts as one layer for ResNet-style nets, a Conv-BN-ReLU sequence as one
layer for VGG-style nets. Each model exposes ``feature_units()`` naming
the modules to hook, in forward order, with a ``repeatable`` flag that is
true exactly for the repeated blocks inside a stage (identity-shortcut
residual blocks, channel-preserving conv units).
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn


@dataclass(frozen=True)
class FeatureUnit:
    name: str
    module: nn.Module
    repeatable: bool
    stage: str


def conv_bn_relu(in_ch: int, out_ch: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, kernel_size=3, padding=1, bias=False),
        nn.BatchNorm2d(out_ch),
        nn.ReLU(inplace=True),
    )


class TinyVGG(nn.Module):
    """Stacked Conv-BN-ReLU units with pooling between stages."""

    def __init__(self, n_classes: int, in_channels: int = 3):
        super().__init__()
        self.unit1 = conv_bn_relu(in_channels, 16)
        self.unit2 = conv_bn_relu(16, 16)
        self.pool1 = nn.MaxPool2d(2)
        self.unit3 = conv_bn_relu(16, 32)
        self.unit4 = conv_bn_relu(32, 32)
        self.pool2 = nn.MaxPool2d(2)
        self.unit5 = conv_bn_relu(32, 64)
        self.head = nn.Sequential(nn.AdaptiveAvgPool2d(1), nn.Flatten(), nn.Linear(64, n_classes))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.unit2(self.unit1(x))
        x = self.unit4(self.unit3(self.pool1(x)))
        x = self.unit5(self.pool2(x))
        return self.head(x)

    def feature_units(self) -> list[FeatureUnit]:
        return [
            FeatureUnit("conv1_1", self.unit1, repeatable=False, stage="block1"),
            FeatureUnit("conv1_2", self.unit2, repeatable=True, stage="block1"),
            FeatureUnit("conv2_1", self.unit3, repeatable=False, stage="block2"),
            FeatureUnit("conv2_2", self.unit4, repeatable=True, stage="block2"),
            FeatureUnit("conv3_1", self.unit5, repeatable=False, stage="block3"),
        ]


class BasicBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(out_ch)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(out_ch)
        self.relu = nn.ReLU(inplace=True)
        if stride != 1 or in_ch != out_ch:
            self.shortcut = nn.Sequential(
                nn.Conv2d(in_ch, out_ch, 1, stride=stride, bias=False),
                nn.BatchNorm2d(out_ch),
            )
        else:
            self.shortcut = nn.Identity()

    @property
    def has_identity_shortcut(self) -> bool:
        return isinstance(self.shortcut, nn.Identity)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return self.relu(out + self.shortcut(x))


class TinyResNet(nn.Module):
    """Stem plus three stages of two basic blocks each."""

    def __init__(self, n_classes: int, in_channels: int = 3):
        super().__init__()
        self.stem = conv_bn_relu(in_channels, 16)
        self.stage1 = nn.ModuleList([BasicBlock(16, 16), BasicBlock(16, 16)])
        self.stage2 = nn.ModuleList([BasicBlock(16, 32, stride=2), BasicBlock(32, 32)])
        self.stage3 = nn.ModuleList([BasicBlock(32, 64, stride=2), BasicBlock(64, 64)])
        self.head = nn.Sequential(nn.AdaptiveAvgPool2d(1), nn.Flatten(), nn.Linear(64, n_classes))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.stem(x)
        for stage in (self.stage1, self.stage2, self.stage3):
            for block in stage:
                x = block(x)
        return self.head(x)

    def feature_units(self) -> list[FeatureUnit]:
        units = [FeatureUnit("stem", self.stem, repeatable=False, stage="stem")]
        for stage_idx, stage in enumerate((self.stage1, self.stage2, self.stage3), start=1):
            for block_idx, block in enumerate(stage, start=1):
                units.append(
                    FeatureUnit(
                        f"stage{stage_idx}_block{block_idx}",
                        block,
                        repeatable=block.has_identity_shortcut,
                        stage=f"stage{stage_idx}",
                    )
                )
        return units


MODELS = {"tinyvgg": TinyVGG, "tinyresnet": TinyResNet}


def build_model(name: str, n_classes: int, in_channels: int = 3) -> nn.Module:
    if name not in MODELS:
        raise ValueError(f"unknown model {name!r}, available: {sorted(MODELS)}")
    return MODELS[name](n_classes=n_classes, in_channels=in_channels)
