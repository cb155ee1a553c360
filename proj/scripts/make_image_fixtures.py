#!/usr/bin/env python3
"""Builds the committed image fixtures used by the test suite.

Natural-image sources are the public-domain test photographs bundled
with scikit-image (camera, astronaut). Outputs:

  fixtures/images/camera_128.pgm        128x128 grayscale
  fixtures/images/astronaut_100x76.ppm  100x76 color (not multiples of 8)
  fixtures/images/astronaut_61x45.ppm   61x45 color (odd dimensions)
  fixtures/images/pinned16.ppm          16x16 color crop (golden-encode input)
  fixtures/golden/reference_gray.jpg    camera_128 encoded by Pillow/libjpeg,
                                        quality 75, no subsampling, grayscale
  fixtures/golden/reference_gray.pgm    Pillow's decode of reference_gray.jpg
  fixtures/golden/reference_color.jpg   24x24 astronaut crop encoded by
                                        Pillow/libjpeg, quality 75, 4:4:4
  fixtures/golden/reference_color.ppm   Pillow's decode of reference_color.jpg
  fixtures/golden/restart.jpg           64x64 grayscale with DRI/RST markers
                                        (restart interval of one MCU row)
  fixtures/golden/restart.pgm           Pillow's decode of restart.jpg
"""

import os

import numpy as np
from PIL import Image
from skimage import data

ROOT = os.path.join(os.path.dirname(__file__), "..")
IMAGES = os.path.join(ROOT, "fixtures", "images")
GOLDEN = os.path.join(ROOT, "fixtures", "golden")


def save_pnm(path, arr):
    if arr.ndim == 2:
        header = b"P5\n%d %d\n255\n" % (arr.shape[1], arr.shape[0])
    else:
        header = b"P6\n%d %d\n255\n" % (arr.shape[1], arr.shape[0])
    with open(path, "wb") as f:
        f.write(header + arr.astype(np.uint8).tobytes())


def main():
    os.makedirs(IMAGES, exist_ok=True)
    os.makedirs(GOLDEN, exist_ok=True)

    camera = Image.fromarray(data.camera())  # 512x512 grayscale
    astronaut = Image.fromarray(data.astronaut())  # 512x512x3

    cam128 = np.asarray(camera.resize((128, 128), Image.LANCZOS))
    save_pnm(os.path.join(IMAGES, "camera_128.pgm"), cam128)

    ast100 = np.asarray(astronaut.resize((100, 76), Image.LANCZOS))
    save_pnm(os.path.join(IMAGES, "astronaut_100x76.ppm"), ast100)

    ast61 = np.asarray(astronaut.resize((61, 45), Image.LANCZOS))
    save_pnm(os.path.join(IMAGES, "astronaut_61x45.ppm"), ast61)

    # 16x16 crop from the face region: natural content, all-channel detail.
    pinned16 = np.asarray(astronaut)[120:136, 180:196]
    save_pnm(os.path.join(IMAGES, "pinned16.ppm"), pinned16)

    gray_jpg = os.path.join(GOLDEN, "reference_gray.jpg")
    Image.fromarray(cam128).save(gray_jpg, quality=75, subsampling=0)
    save_pnm(
        os.path.join(GOLDEN, "reference_gray.pgm"),
        np.asarray(Image.open(gray_jpg).convert("L")),
    )

    color_src = np.asarray(astronaut)[40:64, 112:136]
    color_jpg = os.path.join(GOLDEN, "reference_color.jpg")
    Image.fromarray(color_src).save(color_jpg, quality=75, subsampling=0)
    save_pnm(
        os.path.join(GOLDEN, "reference_color.ppm"),
        np.asarray(Image.open(color_jpg).convert("RGB")),
    )

    restart_jpg = os.path.join(GOLDEN, "restart.jpg")
    cam64 = np.asarray(camera.resize((64, 64), Image.LANCZOS))
    Image.fromarray(cam64).save(restart_jpg, quality=75, restart_marker_rows=1)
    save_pnm(
        os.path.join(GOLDEN, "restart.pgm"),
        np.asarray(Image.open(restart_jpg).convert("L")),
    )
    print("fixtures written")


if __name__ == "__main__":
    main()
