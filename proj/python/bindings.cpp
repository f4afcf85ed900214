#include <pybind11/pybind11.h>
PYBIND11_MODULE(_cwdlab, m) { m.doc() = "placeholder"; }
