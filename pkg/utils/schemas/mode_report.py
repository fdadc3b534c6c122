from pydantic import BaseModel, Field
from typing import List, Optional
from enum import Enum


class RegimeEnum(str, Enum):
    """Regime labels in serialized reports"""
    I = "I"
    II = "II"
    III = "III"


class ChainSpecModel(BaseModel):
    """Schema for the chain specification"""
    N: int = Field(..., ge=1, description="Number of sites on the ring")
    xi: float = Field(..., gt=0.0, description="Hyperbolic coupling angle")
    alpha: float = Field(..., gt=0.0, le=1.0, description="Nearest neighbour coupling tanh(2 xi)")
    z: float = Field(..., gt=0.0, le=1.0, description="tanh(xi)")
    mu_aux: float = Field(..., gt=0.0, description="1/sqrt(1 + z^2)")
    one_minus_alpha: float = Field(..., gt=0.0, description="1 - alpha without cancellation")
    one_minus_z: float = Field(..., gt=0.0, description="1 - z without cancellation")


class PartitionModel(BaseModel):
    """Schema for the block partition"""
    block_start: int = Field(..., description="First site of the block")
    N_b: int = Field(..., ge=1, description="Block size")


class ModeModel(BaseModel):
    """Schema for one Williamson mode and its complement partner"""
    lam: float = Field(..., alias="lambda", ge=0.5 - 1e-9, description="Symplectic eigenvalue")
    kappa: float = Field(..., ge=0.0, description="sqrt(lambda^2 - 1/4)")
    excess: float = Field(..., ge=0.0, description="lambda - 1/2 without cancellation")
    parity: int = Field(..., description="Reflection parity, +1 or -1")
    entropy: float = Field(..., ge=0.0, description="Von Neumann entropy of the mode")
    beta: Optional[float] = Field(default=None, description="Boltzmann factor, None when infinite")
    turning_point: float = Field(..., ge=0.0, description="Distance of the participation maximum from the block centre")
    entangled: bool = Field(default=True, description="False when lambda - 1/2 is below significance")
    degenerate: bool = Field(default=False, description="Near-degenerate within its parity sector")
    u_A: List[float] = Field(..., description="Position mode function on the block")
    v_A: List[float] = Field(..., description="Momentum mode function on the block")
    u_B: Optional[List[float]] = Field(default=None, description="Partner position mode function on the complement")
    v_B: Optional[List[float]] = Field(default=None, description="Partner momentum mode function on the complement")
    participation_A: List[float] = Field(..., description="Participation function u_i v_i on the block")

    model_config = {"populate_by_name": True}


class ModeReportModel(BaseModel):
    """Schema for the JSON mode report"""
    spec: ChainSpecModel
    partition: PartitionModel
    regime: RegimeEnum
    modes: List[ModeModel] = Field(..., description="Modes in decreasing order of entanglement")
    total: float = Field(..., ge=0.0, description="Total block entanglement")
