#pragma once

namespace sta {

struct Units {
  double hbar = 1.0;
  double mass = 1.0;
  double kB = 1.0;
};

}  // namespace sta
