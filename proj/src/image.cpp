#include "smd/image.hpp"

#include <fstream>

#include "smd/errors.hpp"

namespace smd {

namespace {

// Next whitespace-delimited token, skipping '#' comments to end of line.
std::string next_token(std::istream& is) {
  std::string tok;
  int c;
  while ((c = is.get()) != EOF) {
    if (c == '#') {
      while ((c = is.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int parse_header_int(std::istream& is, const char* what) {
  const std::string tok = next_token(is);
  try {
    std::size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size() || v < 0) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw InputError(std::string("bad PNM header field: ") + what);
  }
}

}  // namespace

Image read_pnm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open image file: " + path);
  const std::string magic = next_token(is);
  Image img;
  if (magic == "P5")
    img.channels = 1;
  else if (magic == "P6")
    img.channels = 3;
  else
    throw InputError("unsupported PNM magic (P5/P6 expected): " + magic);
  img.width = parse_header_int(is, "width");
  img.height = parse_header_int(is, "height");
  const int maxval = parse_header_int(is, "maxval");
  if (maxval != 255) throw InputError("only maxval 255 PNM images are supported");
  if (img.width <= 0 || img.height <= 0) throw InputError("empty image");
  // Single whitespace byte separates the header from the payload.
  img.data.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
  is.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (static_cast<std::size_t>(is.gcount()) != img.data.size())
    throw InputError("truncated PNM payload: " + path);
  return img;
}

void write_pnm(const Image& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3) throw InputError("PNM supports 1 or 3 channels");
  if (img.data.size() != static_cast<std::size_t>(img.width) * img.height * img.channels)
    throw InputError("image data size mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open image file for writing: " + path);
  os << (img.channels == 1 ? "P5" : "P6") << '\n'
     << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.data.data()),
           static_cast<std::streamsize>(img.data.size()));
  if (!os) throw InputError("failed writing image file: " + path);
}

}  // namespace smd
