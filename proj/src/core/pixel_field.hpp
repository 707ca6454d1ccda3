#pragma once

#include "core/raster.hpp"

namespace lcamv {

enum class Channel { R = 0, G = 1, B = 2 };

inline const char* channel_name(Channel c) {
  switch (c) {
    case Channel::R: return "R";
    case Channel::G: return "G";
    case Channel::B: return "B";
  }
  return "?";
}

/// Per-camera-pixel estimate of the projector column u_p with its variance.
/// This is the currency passed between phase decoding, projector-LCA
/// correction and channel fusion. The u_p mask is authoritative; variance is
/// valid wherever u_p is.
struct ProjectorPixelField {
  ChannelRaster u_p;       // projector pixels, indexed by camera pixel
  ChannelRaster variance;  // pixel^2; empty until a noise model is attached
  Channel channel = Channel::G;
};

}  // namespace lcamv
