"""Generator and discriminator architectures.

Generator: a U-Net with three encoder/decoder levels and skip connections.
Discriminator: seven conv blocks, each convolution followed by
rectification and dropout, closed by spatial average pooling so the output
is one confidence score per image regardless of input size.
"""

import torch
from torch import nn

UNET_DEPTH = 3
DISC_BLOCKS = 7


def _conv_block(in_ch, out_ch):
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, 3, padding=1),
        nn.ReLU(inplace=True),
        nn.Conv2d(out_ch, out_ch, 3, padding=1),
        nn.ReLU(inplace=True),
    )


class UNetGenerator(nn.Module):
    """Three-level U-Net; the spatial stride is ``2 ** UNET_DEPTH`` = 8.

    Inputs are (B, 3, H, W) with H and W multiples of 8 (the inference
    helper pads arbitrary sizes). The network predicts a residual
    correction on top of its input, clamped back to [0, 1]: a freshly
    initialized filter is therefore a near-identity, and training only has
    to learn the artifact pattern to subtract.
    """

    def __init__(self, base_channels=16):
        super().__init__()
        chans = [base_channels * (2 ** i) for i in range(UNET_DEPTH + 1)]
        self.encoders = nn.ModuleList(
            [_conv_block(3, chans[0])]
            + [_conv_block(chans[i], chans[i + 1])
               for i in range(UNET_DEPTH - 1)])
        self.pool = nn.MaxPool2d(2)
        self.bottleneck = _conv_block(chans[UNET_DEPTH - 1], chans[UNET_DEPTH])
        self.upsamplers = nn.ModuleList(
            [nn.ConvTranspose2d(chans[i + 1], chans[i], 2, stride=2)
             for i in reversed(range(UNET_DEPTH))])
        self.decoders = nn.ModuleList(
            [_conv_block(2 * chans[i], chans[i])
             for i in reversed(range(UNET_DEPTH))])
        self.head = nn.Conv2d(chans[0], 3, 1)
        nn.init.normal_(self.head.weight, std=1e-3)
        nn.init.zeros_(self.head.bias)

    def forward(self, x):
        frame = x
        skips = []
        for encoder in self.encoders:
            x = encoder(x)
            skips.append(x)
            x = self.pool(x)
        x = self.bottleneck(x)
        for upsample, decoder, skip in zip(self.upsamplers, self.decoders,
                                           reversed(skips)):
            x = upsample(x)
            x = decoder(torch.cat([x, skip], dim=1))
        return torch.clamp(frame + self.head(x), 0.0, 1.0)


class Discriminator(nn.Module):
    """Seven stride-2 conv blocks (conv, ReLU, dropout), then average
    pooling to a single real-valued confidence per image."""

    def __init__(self, base_channels=16, dropout=0.5):
        super().__init__()
        layers = []
        in_ch = 3
        out_ch = base_channels
        for _ in range(DISC_BLOCKS):
            layers += [
                nn.Conv2d(in_ch, out_ch, 3, stride=2, padding=1),
                nn.ReLU(inplace=True),
                nn.Dropout2d(dropout),
            ]
            in_ch = out_ch
            out_ch = min(out_ch * 2, 8 * base_channels)
        self.blocks = nn.Sequential(*layers)
        self.score = nn.Conv2d(in_ch, 1, 1)

    def forward(self, x):
        features = self.score(self.blocks(x))
        return features.mean(dim=(1, 2, 3))
