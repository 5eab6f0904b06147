from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from .routers import analysis
from .core.config import settings
from .core.logging import configure_logging

configure_logging()

app = FastAPI(
    title=settings.PROJECT_NAME,
    description="Forensic statistics for replicate comet assay count data",
    version=settings.VERSION
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(analysis.router, prefix=settings.API_V1_STR, tags=["analysis"])

@app.get("/")
async def root():
    return {"message": "Comet Assay Forensics API is running"}
