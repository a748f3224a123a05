#include "maskcraft/data/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "maskcraft/errors.hpp"

namespace maskcraft::data {
namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string discard;
      std::getline(in, discard);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(ch);
  }
  return token;
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  std::string bytes(image.pixels.size(), '\0');
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const float v = std::clamp(image.pixels[i], 0.0f, 1.0f);
    bytes[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f)));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw LoadError("failed writing " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open image " + path.string());
  const std::string magic = next_token(in);
  if (magic != "P6" && magic != "P5") throw LoadError(path.string() + ": unsupported image format '" + magic + "'");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw LoadError(path.string() + ": malformed header");
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw LoadError(path.string() + ": unsupported dimensions or maxval");
  }
  const int channels = magic == "P6" ? 3 : 1;
  std::string bytes(static_cast<std::size_t>(width) * height * channels, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw LoadError(path.string() + ": truncated pixel data");
  }
  Image image(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        const std::size_t idx = (static_cast<std::size_t>(r) * width + c) * channels + (channels == 3 ? ch : 0);
        image.at(r, c, ch) = static_cast<float>(static_cast<unsigned char>(bytes[idx])) / float(maxval);
      }
    }
  }
  return image;
}

}  // namespace maskcraft::data
