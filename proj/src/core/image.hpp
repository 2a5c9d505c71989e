#pragma once

#include <string>
#include <vector>

namespace graphae {

// 8-bit grayscale PNG I/O; pixel values map linearly to [0,1] floats
void write_png_gray(const std::string& path, const std::vector<float>& img, int width,
                    int height);
std::vector<float> read_png_gray(const std::string& path, int& width, int& height);

// paste `tile` (tw x th) into `canvas` (cw x ch) with its top-left at (x, y)
void paste_tile(std::vector<float>& canvas, int cw, int ch,
                const std::vector<float>& tile, int tw, int th, int x, int y);

}  // namespace graphae
