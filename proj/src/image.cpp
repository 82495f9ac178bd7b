#include "ilnet/image.hpp"

#include "ilnet/error.hpp"

namespace ilnet {

Image convert_channels(const Image& src, int channels) {
  if (src.channels == channels) return src;
  Image out(src.width, src.height, channels);
  const std::size_t n = static_cast<std::size_t>(src.width) * src.height;
  if (src.channels == 1 && channels == 3) {
    for (std::size_t i = 0; i < n; ++i)
      out.values[3 * i] = out.values[3 * i + 1] = out.values[3 * i + 2] = src.values[i];
  } else if (src.channels == 3 && channels == 1) {
    for (std::size_t i = 0; i < n; ++i)
      out.values[i] = 0.299f * src.values[3 * i] + 0.587f * src.values[3 * i + 1] +
                      0.114f * src.values[3 * i + 2];
  } else {
    throw InputError("unsupported channel conversion " + std::to_string(src.channels) + " -> " +
                     std::to_string(channels));
  }
  return out;
}

}  // namespace ilnet
