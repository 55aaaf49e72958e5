import logging
import os

from dotenv import load_dotenv
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.controllers import evaluation_controller, health_controller, verification_controller

load_dotenv()
logging.basicConfig(level=os.getenv("OU_KIT_LOG_LEVEL", "INFO").upper())

app = FastAPI(
    title="OU Kernel Kit",
    description="Heat kernels, bound constants and verification runs for complex Ornstein-Uhlenbeck systems",
    version="0.1.0",
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# Include routers
app.include_router(health_controller.router, tags=["Health"])
app.include_router(evaluation_controller.router, prefix="/api/v1", tags=["Evaluation"])

# Local runs, single suites (called by the run_suite activity) and Temporal workflows
app.include_router(verification_controller.router, prefix="/api/v1", tags=["Verification"])


@app.get("/")
async def root():
    return {
        "message": "Welcome to the OU Kernel Kit API",
        "version": "0.1.0",
        "docs": "/docs",
    }
