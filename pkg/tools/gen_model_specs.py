#!/usr/bin/env python3
"""Regenerate the bundled model specs and the synthetic accuracy table.

The specs list the matmul-representable weight layers (convolutions as
implicit GEMM, linear layers) of six reference vision architectures at
ImageNet-100 head width. Depthwise convolutions are not representable and
are omitted; stems and classifier heads are marked non-prunable. Run from
the repository root:

    python tools/gen_model_specs.py
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "sparseroof" / "data"

NUM_CLASSES = 100  # ImageNet-100


def conv(lid, c_in, c_out, k, s, p, hw, prunable=True):
    return {
        "id": lid, "kind": "conv", "c_in": c_in, "c_out": c_out,
        "kernel_h": k, "kernel_w": k, "stride": s, "padding": p,
        "in_h": hw, "in_w": hw, "prunable": prunable,
    }


def linear(lid, fin, fout, tokens=1, prunable=True):
    return {
        "id": lid, "kind": "linear", "in_features": fin, "out_features": fout,
        "tokens_per_sample": tokens, "prunable": prunable,
    }


def resnet50():
    layers = [conv("stem", 3, 64, 7, 2, 3, 224, prunable=False)]
    stages = [(3, 64, 56, 56), (4, 128, 56, 28), (6, 256, 28, 14), (3, 512, 14, 7)]
    in_c = 64  # after stem + maxpool
    for si, (blocks, w, in_sp, sp) in enumerate(stages, start=1):
        stride = 1 if si == 1 else 2
        for b in range(1, blocks + 1):
            pre = f"s{si}b{b}"
            if b == 1:
                layers.append(conv(f"{pre}_conv1", in_c, w, 1, 1, 0, in_sp))
                layers.append(conv(f"{pre}_conv2", w, w, 3, stride, 1, in_sp))
                layers.append(conv(f"{pre}_down", in_c, 4 * w, 1, stride, 0, in_sp))
            else:
                layers.append(conv(f"{pre}_conv1", 4 * w, w, 1, 1, 0, sp))
                layers.append(conv(f"{pre}_conv2", w, w, 3, 1, 1, sp))
            layers.append(conv(f"{pre}_conv3", w, 4 * w, 1, 1, 0, sp))
        in_c = 4 * w
    layers.append(linear("fc", 2048, NUM_CLASSES, prunable=False))
    return {"name": "resnet50", "batch": 1, "layers": layers}


def efficientnet_b4():
    layers = [conv("stem", 3, 48, 3, 2, 1, 380, prunable=False)]
    # (expand_ratio, c_out, blocks, in_sp, out_sp); depthwise convs omitted.
    stages = [
        (1, 24, 2, 190, 190),
        (6, 32, 4, 190, 95),
        (6, 56, 4, 95, 48),
        (6, 112, 6, 48, 24),
        (6, 160, 6, 24, 24),
        (6, 272, 8, 24, 12),
        (6, 448, 2, 12, 12),
    ]
    in_c = 48
    for si, (ratio, c_out, blocks, in_sp, out_sp) in enumerate(stages, start=1):
        for b in range(1, blocks + 1):
            pre = f"s{si}b{b}"
            block_in = in_c if b == 1 else c_out
            sp_in = in_sp if b == 1 else out_sp
            if ratio != 1:
                layers.append(conv(f"{pre}_expand", block_in, block_in * ratio, 1, 1, 0, sp_in))
                proj_in = block_in * ratio
            else:
                proj_in = block_in
            layers.append(conv(f"{pre}_project", proj_in, c_out, 1, 1, 0, out_sp))
        in_c = c_out
    layers.append(conv("head_conv", 448, 1792, 1, 1, 0, 12))
    layers.append(linear("classifier", 1792, NUM_CLASSES, prunable=False))
    return {"name": "efficientnet_b4", "batch": 1, "layers": layers}


def convnext_tiny():
    layers = [conv("stem", 3, 96, 4, 4, 0, 224, prunable=False)]
    dims = [96, 192, 384, 768]
    depths = [3, 3, 9, 3]
    spatial = [56, 28, 14, 7]
    for si in range(4):
        dim, sp = dims[si], spatial[si]
        if si > 0:
            layers.append(conv(f"down{si}", dims[si - 1], dim, 2, 2, 0, spatial[si - 1]))
        for b in range(1, depths[si] + 1):
            tokens = sp * sp
            layers.append(linear(f"s{si + 1}b{b}_pw1", dim, 4 * dim, tokens))
            layers.append(linear(f"s{si + 1}b{b}_pw2", 4 * dim, dim, tokens))
    layers.append(linear("head", 768, NUM_CLASSES, prunable=False))
    return {"name": "convnext_tiny", "batch": 1, "layers": layers}


def swin_tiny():
    layers = [conv("patch_embed", 3, 96, 4, 4, 0, 224, prunable=False)]
    dims = [96, 192, 384, 768]
    depths = [2, 2, 6, 2]
    tokens = [3136, 784, 196, 49]
    for si in range(4):
        dim, t = dims[si], tokens[si]
        if si > 0:
            layers.append(linear(f"merge{si}", 4 * dims[si - 1], dim, tokens[si]))
        for b in range(1, depths[si] + 1):
            pre = f"s{si + 1}b{b}"
            layers.append(linear(f"{pre}_qkv", dim, 3 * dim, t))
            layers.append(linear(f"{pre}_proj", dim, dim, t))
            layers.append(linear(f"{pre}_fc1", dim, 4 * dim, t))
            layers.append(linear(f"{pre}_fc2", 4 * dim, dim, t))
    layers.append(linear("head", 768, NUM_CLASSES, prunable=False))
    return {"name": "swin_tiny", "batch": 1, "layers": layers}


def deit_small():
    layers = [conv("patch_embed", 3, 384, 16, 16, 0, 224, prunable=False)]
    tokens = 197  # 196 patches + class token
    for b in range(1, 13):
        pre = f"block{b}"
        layers.append(linear(f"{pre}_qkv", 384, 1152, tokens))
        layers.append(linear(f"{pre}_proj", 384, 384, tokens))
        layers.append(linear(f"{pre}_fc1", 384, 1536, tokens))
        layers.append(linear(f"{pre}_fc2", 1536, 384, tokens))
    layers.append(linear("head", 384, NUM_CLASSES, prunable=False))
    return {"name": "deit_small", "batch": 1, "layers": layers}


def mlp_mixer_small():
    layers = [conv("stem", 3, 512, 16, 16, 0, 224, prunable=False)]
    for b in range(1, 9):
        pre = f"block{b}"
        # Token mixing acts on the 196-long token axis, once per channel.
        layers.append(linear(f"{pre}_token_fc1", 196, 256, 512))
        layers.append(linear(f"{pre}_token_fc2", 256, 196, 512))
        layers.append(linear(f"{pre}_channel_fc1", 512, 2048, 196))
        layers.append(linear(f"{pre}_channel_fc2", 2048, 512, 196))
    layers.append(linear("head", 512, NUM_CLASSES, prunable=False))
    return {"name": "mlp_mixer_small", "batch": 1, "layers": layers}


SWEEP_LEVELS = [0.5, 0.75, 0.875, 0.9375, 0.96875]
BASE_TOP1 = {"convnext_tiny": 0.894, "swin_tiny": 0.889}


def synthetic_top1(base: float, level: float, granularity: float) -> float:
    """Smooth, clearly synthetic accuracy curve: drops faster for coarser patterns."""
    odds = level / (1.0 - level)
    return round(max(base - 0.004 * granularity * odds**0.8, 0.05), 4)


def accuracy_rows():
    rows = ["model,pattern,level,top1"]
    for model, base in BASE_TOP1.items():
        for level in SWEEP_LEVELS:
            rows.append(f"{model},unstructured,{level:g},{synthetic_top1(base, level, 1.0)}")
        for b in (2, 4, 8, 16, 32):
            g = 1.0 + (2 * (b.bit_length() - 1)) / 2.0  # log2(b*b) / 2
            for level in SWEEP_LEVELS:
                rows.append(f"{model},block:{b}x{b},{level:g},{synthetic_top1(base, level, g)}")
        for n, m in ((2, 4), (1, 4), (2, 8), (2, 16)):
            level = 1.0 - n / m
            g = 1.0 + 0.08 * (m // n).bit_length()
            rows.append(f"{model},nm:{n}:{m},{level:g},{synthetic_top1(base, level, g)}")
    return rows


def main():
    models_dir = OUT / "models"
    models_dir.mkdir(parents=True, exist_ok=True)
    for build in (resnet50, efficientnet_b4, convnext_tiny, swin_tiny, deit_small,
                  mlp_mixer_small):
        spec = build()
        path = models_dir / f"{spec['name']}.json"
        path.write_text(json.dumps(spec, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {path} ({len(spec['layers'])} layers)")
    acc_dir = OUT / "accuracy"
    acc_dir.mkdir(parents=True, exist_ok=True)
    acc = acc_dir / "synthetic_imagenet100.csv"
    acc.write_text("\n".join(accuracy_rows()) + "\n", encoding="utf-8")
    print(f"wrote {acc}")


if __name__ == "__main__":
    main()
