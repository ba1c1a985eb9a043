"""
Analytic data fields: velocity fields, initial data and manufactured solutions
"""
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class VelocityField(BaseModel):
    """Registered analytic velocity field V(x, y) with its divergence

    kinds:
        zero       V = (0, 0)
        expanding  V = (v0 x, v0 y)
        sheer      V = (0, -v0 y)
        affine     V = (a x + b, c y + d)
        sine       V = (v0 sin x, 0)
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["zero", "expanding", "sheer", "affine", "sine"] = "zero"
    v0: float = 0.0
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __call__(self, x, y) -> np.ndarray:
        """Evaluate V at points; returns an array of shape x.shape + (2,)"""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "zero":
            vx, vy = np.zeros_like(x), np.zeros_like(y)
        elif self.kind == "expanding":
            vx, vy = self.v0 * x, self.v0 * y
        elif self.kind == "sheer":
            vx, vy = np.zeros_like(x), -self.v0 * y
        elif self.kind == "affine":
            vx, vy = self.a * x + self.b, self.c * y + self.d
        else:
            vx, vy = self.v0 * np.sin(x), np.zeros_like(y)
        return np.stack([vx, vy], axis=-1)

    def divergence(self, x, y) -> np.ndarray:
        """Analytic divergence of V at points"""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "zero":
            return np.zeros(np.broadcast(x, y).shape)
        if self.kind == "expanding":
            return np.full(np.broadcast(x, y).shape, 2.0 * self.v0)
        if self.kind == "sheer":
            return np.full(np.broadcast(x, y).shape, -self.v0)
        if self.kind == "affine":
            return np.full(np.broadcast(x, y).shape, self.a + self.c)
        return self.v0 * np.cos(x) + 0.0 * y


class ScalarField(BaseModel):
    """Registered analytic scalar field used as initial condition

    kinds:
        zero      g = 0
        constant  g = value
        disk      g = value inside x^2 + y^2 <= radius_squared, 0 outside
        square    g = value inside |x|, |y| <= half_width, 0 outside
        linear    g = a x + b y + c
        cosine    g = value cos(pi x) cos(pi y)
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["zero", "constant", "disk", "square", "linear", "cosine"] = "zero"
    value: float = 1.0
    radius_squared: float = Field(0.3, gt=0)
    half_width: float = Field(0.1, gt=0)
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape
        if self.kind == "zero":
            return np.zeros(shape)
        if self.kind == "constant":
            return np.full(shape, self.value)
        if self.kind == "disk":
            return np.where(x ** 2 + y ** 2 <= self.radius_squared, self.value, 0.0)
        if self.kind == "square":
            inside = (np.abs(x) <= self.half_width) & (np.abs(y) <= self.half_width)
            return np.where(inside, self.value, 0.0)
        if self.kind == "linear":
            return self.a * x + self.b * y + self.c + np.zeros(shape)
        return self.value * np.cos(np.pi * x) * np.cos(np.pi * y)


class ManufacturedSolution(BaseModel):
    """Smooth exact solution used to build verification problems

    kinds:
        cosine  u = cos(pi x) cos(pi y)   (zero normal derivative on [-1,1]^2)
        linear  u = a x + b y + c
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["cosine", "linear"] = "cosine"
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0

    def value(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "cosine":
            return np.cos(np.pi * x) * np.cos(np.pi * y)
        return self.a * x + self.b * y + self.c + 0.0 * x * y

    def gradient(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "cosine":
            gx = -np.pi * np.sin(np.pi * x) * np.cos(np.pi * y)
            gy = -np.pi * np.cos(np.pi * x) * np.sin(np.pi * y)
        else:
            shape = np.broadcast(x, y).shape
            gx, gy = np.full(shape, self.a), np.full(shape, self.b)
        return np.stack([gx, gy], axis=-1)

    def laplacian(self, x, y) -> np.ndarray:
        if self.kind == "cosine":
            return -2.0 * np.pi ** 2 * self.value(x, y)
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
