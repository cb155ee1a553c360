#!/usr/bin/env python3
"""Builds the bundled handwritten-digit dataset in MNIST IDX format.

Source: the UCI ML hand-written digits set shipped with scikit-learn
(1797 images of 8x8, 10 classes). Images are upscaled to 28x28 with
bilinear interpolation. The last 1000 images (after a fixed shuffle)
form the test split; the remaining 797 form the training split, padded
with four +/-1-pixel translated copies of each image so a small CNN
trains to high accuracy. Train and test splits are disjoint by source
image.

Outputs (committed to the repo):
  data/digits/train-images-idx3-ubyte
  data/digits/train-labels-idx1-ubyte
  data/digits/t10k-images-idx3-ubyte
  data/digits/t10k-labels-idx1-ubyte
"""

import os
import struct

import numpy as np
from PIL import Image
from sklearn.datasets import load_digits

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "data", "digits")


def upscale(img8):
    # 8x8 floats in 0..16 -> 28x28 uint8 in 0..255
    a = np.clip(np.round(img8 * (255.0 / 16.0)), 0, 255).astype(np.uint8)
    return np.asarray(Image.fromarray(a, mode="L").resize((28, 28), Image.BILINEAR))


def shift(img, dy, dx):
    out = np.zeros_like(img)
    h, w = img.shape
    ys = slice(max(dy, 0), min(h + dy, h))
    xs = slice(max(dx, 0), min(w + dx, w))
    ys_src = slice(max(-dy, 0), min(h - dy, h))
    xs_src = slice(max(-dx, 0), min(w - dx, w))
    out[ys, xs] = img[ys_src, xs_src]
    return out


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(img.tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(int(l) for l in labels))


def main():
    data = load_digits()
    rng = np.random.RandomState(0)
    order = rng.permutation(len(data.images))
    images = [upscale(data.images[i]) for i in order]
    labels = [int(data.target[i]) for i in order]

    test_images, test_labels = images[-1000:], labels[-1000:]
    train_src, train_src_labels = images[:-1000], labels[:-1000]

    train_images, train_labels = [], []
    for img, lab in zip(train_src, train_src_labels):
        train_images.append(img)
        train_labels.append(lab)
        for dy, dx in [(-1, 0), (1, 0), (0, -1), (0, 1)]:
            train_images.append(shift(img, dy, dx))
            train_labels.append(lab)

    os.makedirs(OUT_DIR, exist_ok=True)
    write_idx_images(os.path.join(OUT_DIR, "train-images-idx3-ubyte"), train_images)
    write_idx_labels(os.path.join(OUT_DIR, "train-labels-idx1-ubyte"), train_labels)
    write_idx_images(os.path.join(OUT_DIR, "t10k-images-idx3-ubyte"), test_images)
    write_idx_labels(os.path.join(OUT_DIR, "t10k-labels-idx1-ubyte"), test_labels)
    print(f"train: {len(train_images)} images, test: {len(test_images)} images")


if __name__ == "__main__":
    main()
