#pragma once

#include "efrk/diagnostics.hpp"
#include "efrk/driver.hpp"
#include "efrk/error.hpp"
#include "efrk/experiments.hpp"
#include "efrk/fft.hpp"
#include "efrk/grid.hpp"
#include "efrk/io.hpp"
#include "efrk/model.hpp"
#include "efrk/schemes.hpp"
#include "efrk/spectral.hpp"
#include "efrk/stability.hpp"
#include "efrk/tableau.hpp"
#include "efrk/taylor.hpp"
